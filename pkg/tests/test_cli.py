import json
import tempfile
import unittest
from pathlib import Path

from click.testing import CliRunner

from app import create_cli
from tests.helpers import CORPUS_PATH, NITROGEN_TASK_PATH


class CliTestCase(unittest.TestCase):
    '''Base: executor click e diretório temporário'''

    def setUp(self):
        self.runner = CliRunner()
        self.cli = create_cli()
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def invoke(self, *args, profile='testing', expect=0):
        result = self.runner.invoke(self.cli, ['--profile', profile, *map(str, args)])
        self.assertEqual(result.exit_code, expect, result.output)
        return result


class TestDataCommands(CliTestCase):
    '''Comandos de dados'''

    def test_curate_byte_identical(self):
        '''Mesma semente, mesmos bytes'''
        first, second = self.dir / 'a.txt', self.dir / 'b.txt'
        self.invoke('curate', CORPUS_PATH, '--out', first, '--seed', 9)
        self.invoke('curate', CORPUS_PATH, '--out', second, '--seed', 9)
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertTrue((self.dir / 'a.txt.manifest.json').exists())

    def test_missing_seed_is_usage_error(self):
        '''Opção obrigatória ausente: código 2'''
        self.invoke('curate', CORPUS_PATH, '--out', self.dir / 'a.txt', expect=2)

    def test_subset(self):
        '''Prefixos aninhados e manifesto do diretório'''
        curated = self.dir / 'curated.txt'
        self.invoke('curate', CORPUS_PATH, '--out', curated, '--seed', 1)
        self.invoke('subset', curated, '--sizes', '10,20', '--out-dir', self.dir / 'subsets')
        small = (self.dir / 'subsets' / 'subset_10.txt').read_text(encoding='utf-8').splitlines()
        large = (self.dir / 'subsets' / 'subset_20.txt').read_text(encoding='utf-8').splitlines()
        self.assertEqual(large[:10], small)
        self.assertTrue((self.dir / 'subsets' / 'subsets.manifest.json').exists())

    def test_subset_too_large_is_error(self):
        '''Erro da plataforma: código 1 e mensagem tipada'''
        result = self.invoke('subset', CORPUS_PATH, '--sizes', '10,5000', '--out-dir', self.dir, expect=1)
        self.assertIn('SizeExceedsCorpus', result.output)

    def test_split(self):
        '''Divisão por scaffold com relatório'''
        out = self.dir / 'split.json'
        self.invoke('split', NITROGEN_TASK_PATH, '--label-column', 'contains_n', '--out', out)
        doc = json.loads(out.read_text(encoding='utf-8'))
        self.assertEqual([len(doc[k]) for k in ('train', 'valid', 'test')], [96, 12, 12])
        report = json.loads((self.dir / 'split.json.report.json').read_text(encoding='utf-8'))
        self.assertEqual(report['partitions']['test']['size'], 12)

    def test_to_selfies(self):
        '''Conversão com relatório de linhas ignoradas, numeradas como no arquivo'''
        source = self.dir / 'mixed.smi'
        source.write_text('CCO\n\nC1CC\nc1ccccc1\n', encoding='utf-8')
        out = self.dir / 'mixed.selfies'
        self.invoke('to-selfies', source, '--out', out)
        self.assertEqual(out.read_text(encoding='utf-8').splitlines()[0], '[C][C][O]')
        skipped = json.loads((self.dir / 'mixed.selfies.skipped.json').read_text(encoding='utf-8'))
        self.assertEqual(skipped['skipped'][0]['line'], 3)
        self.assertEqual(skipped['converted'], 2)

    def test_manifest_verification(self):
        '''Manifesto íntegro passa; saída alterada falha com código 1'''
        out = self.dir / 'curated.txt'
        self.invoke('curate', CORPUS_PATH, '--out', out, '--seed', 1)
        manifest = self.dir / 'curated.txt.manifest.json'
        self.invoke('verify-manifest', manifest)
        out.write_text('CCO\n', encoding='utf-8')
        result = self.invoke('verify-manifest', manifest, expect=1)
        self.assertIn('hash divergente', result.output)

    def test_bad_config_file(self):
        '''Chave desconhecida no arquivo de configuração'''
        path = self.dir / 'settings.json'
        path.write_text('{"learning_speed": 1}', encoding='utf-8')
        result = self.runner.invoke(self.cli, ['--config', str(path), 'curate', str(CORPUS_PATH),
                                               '--out', str(self.dir / 'a.txt'), '--seed', '1'])
        self.assertEqual(result.exit_code, 1, result.output)
        self.assertIn('ConfigurationError', result.output)


class TestModelCommands(CliTestCase):
    '''Tokenizador, pré-treino, ajuste fino, baseline e atenção'''

    def train_tokenizer(self):
        path = self.dir / 'tok.json'
        self.invoke('train-tokenizer', CORPUS_PATH, '--kind', 'regex', '--vocab-size', 60, '--out', path)
        return path

    def pretrain(self, tokenizer, out):
        self.invoke('pretrain', CORPUS_PATH, '--tokenizer', tokenizer, '--seed', 3, '--out', out)
        return out

    def test_pretrain_byte_identical(self):
        '''Reexecução com a mesma semente: checkpoint e registro idênticos'''
        tokenizer = self.train_tokenizer()
        first = self.pretrain(tokenizer, self.dir / 'a.ckpt')
        second = self.pretrain(tokenizer, self.dir / 'b.ckpt')
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertEqual((self.dir / 'a.ckpt.runlog.jsonl').read_bytes(),
                         (self.dir / 'b.ckpt.runlog.jsonl').read_bytes())
        self.assertTrue((self.dir / 'a.ckpt.last').exists())

    def test_finetune_and_attention(self):
        '''Ajuste fino gera métricas; exportação de atenção gera mapas de calor'''
        checkpoint = self.pretrain(self.train_tokenizer(), self.dir / 'pre.ckpt')
        tuned = self.dir / 'tuned.ckpt'
        self.invoke('finetune', checkpoint, NITROGEN_TASK_PATH, '--label-column', 'contains_n',
                    '--epochs', 2, '--seed', 3, '--out', tuned)
        metrics = json.loads((self.dir / 'tuned.ckpt.metrics.json').read_text(encoding='utf-8'))
        self.assertEqual(metrics['sizes'], {'train': 96, 'valid': 12, 'test': 12})
        self.assertIn(metrics['best_epoch'], (1, 2))

        export = self.dir / 'attention.json'
        self.invoke('attention-export', tuned, 'c1ccccc1CN', '--layer', 0, '--heatmaps', self.dir / 'maps',
                    '--out', export)
        doc = json.loads(export.read_text(encoding='utf-8'))
        self.assertEqual(len(doc['attention']), 2)
        self.assertEqual(sorted(p.name for p in (self.dir / 'maps').iterdir()),
                         ['layer0_head0.svg', 'layer0_head1.svg'])

    def test_baseline(self):
        '''Baseline grava modelo e relatório'''
        out = self.dir / 'baseline.json'
        self.invoke('baseline', NITROGEN_TASK_PATH, '--label-column', 'contains_n', '--width', 256, '--out', out)
        report = json.loads((self.dir / 'baseline.json.report.json').read_text(encoding='utf-8'))
        self.assertGreater(report['test_roc_auc'], 0.5)
        self.assertEqual(len(json.loads(out.read_text(encoding='utf-8'))['weights']), 256)

    def test_mismatched_resume_is_error(self):
        '''Checkpoint de outra arquitetura: ConfigMismatch, código 1'''
        tokenizer = self.train_tokenizer()
        checkpoint = self.pretrain(tokenizer, self.dir / 'pre.ckpt')
        settings = self.dir / 'wide.json'
        settings.write_text('{"model_d_model": 32}', encoding='utf-8')
        result = self.runner.invoke(self.cli, [
            '--profile', 'testing', '--config', str(settings), 'pretrain', str(CORPUS_PATH),
            '--tokenizer', str(tokenizer), '--resume', str(checkpoint), '--seed', '3',
            '--out', str(self.dir / 'wide.ckpt'),
        ])
        self.assertEqual(result.exit_code, 1, result.output)
        self.assertIn('ConfigMismatch', result.output)


if __name__ == '__main__':
    unittest.main()
