import tempfile
import unittest
from pathlib import Path

import numpy as np

from app.errors import ConfigMismatch
from app.transformer.checkpoint import Checkpoint
from app.transformer.encoder import init_parameters
from app.utils.attention_export import bracket_diagnostic, export_attention, matching_brackets
from app.utils.heatmap import render_heatmap, write_heatmaps
from tests.helpers import fixture_corpus, regex_tokenizer, tiny_model_config


class TestAttentionExport(unittest.TestCase):
    '''Testes da exportação de atenção'''

    @classmethod
    def setUpClass(cls):
        tokenizer = regex_tokenizer(list(fixture_corpus()) + ['C(C)(C)C', 'CC(=O)O'])
        config = tiny_model_config(len(tokenizer.vocab), n_layers=2)
        cls.checkpoint = Checkpoint(config, init_parameters(config, seed=0), tokenizer=tokenizer)
        cls.document = export_attention(cls.checkpoint, 'C(C)(C)C')

    def test_tokens_and_spans(self):
        '''<s> e </s> com spans de largura zero; demais tokens cobrem o texto'''
        doc = self.document
        self.assertEqual(doc['tokens'], ['<s>', 'C', '(', 'C', ')', '(', 'C', ')', 'C', '</s>'])
        self.assertEqual(doc['spans'][0], [0, 0])
        self.assertEqual(doc['spans'][-1], [8, 8])
        self.assertEqual(doc['spans'][1:-1], [[i, i + 1] for i in range(8)])
        self.assertFalse(doc['truncated'])

    def test_all_mechanisms(self):
        '''Uma matriz por (camada, cabeça), linhas somando 1'''
        self.assertEqual([(a['layer'], a['head']) for a in self.document['attention']],
                         [(0, 0), (0, 1), (1, 0), (1, 1)])
        for entry in self.document['attention']:
            matrix = np.asarray(entry['matrix'])
            self.assertEqual(matrix.shape, (10, 10))
            np.testing.assert_allclose(matrix.sum(axis=1), 1.0, atol=1e-5)

    def test_bracket_diagnostic(self):
        '''Atenção média de cada ")" para o "(" correspondente'''
        self.assertEqual(matching_brackets(self.document['tokens']), [(4, 2), (7, 5)])
        for entry, row in zip(self.document['attention'], self.document['bracket_diagnostic']):
            matrix = np.asarray(entry['matrix'])
            self.assertEqual(row['pairs'], 2)
            self.assertAlmostEqual(row['mean_attention'], (matrix[4, 2] + matrix[7, 5]) / 2)

    def test_no_brackets(self):
        '''Sem parênteses a média fica indefinida'''
        doc = export_attention(self.checkpoint, 'CCO')
        self.assertTrue(all(row['mean_attention'] is None for row in doc['bracket_diagnostic']))
        self.assertEqual(bracket_diagnostic([], ['C']), [])

    def test_selection(self):
        '''Seletores de camada e cabeça'''
        doc = export_attention(self.checkpoint, 'C(C)C', layers=[1], heads=[0])
        self.assertEqual([(a['layer'], a['head']) for a in doc['attention']], [(1, 0)])

    def test_requires_tokenizer(self):
        '''Checkpoint sem tokenizador'''
        bare = Checkpoint(self.checkpoint.config, self.checkpoint.params)
        with self.assertRaises(ConfigMismatch):
            export_attention(bare, 'CCO')


class TestHeatmaps(unittest.TestCase):
    '''Testes dos mapas de calor'''

    def setUp(self):
        self.matrix = [[0.7, 0.3], [0.4, 0.6]]
        self.tokens = ['<s>', '</s>']

    def test_svg(self):
        '''SVG com uma célula por entrada'''
        svg = render_heatmap(self.matrix, self.tokens, 'camada 0, cabeça 0', 'svg').decode('utf-8')
        self.assertIn('<svg', svg)
        self.assertGreaterEqual(svg.count('<rect'), 4)

    def test_pdf_reproducible(self):
        '''PDF idêntico byte a byte entre renderizações'''
        first = render_heatmap(self.matrix, self.tokens, fmt='pdf')
        self.assertTrue(first.startswith(b'%PDF'))
        self.assertEqual(first, render_heatmap(self.matrix, self.tokens, fmt='pdf'))

    def test_invalid_format(self):
        '''Formato desconhecido'''
        with self.assertRaises(ValueError):
            render_heatmap(self.matrix, self.tokens, fmt='png')

    def test_write_heatmaps(self):
        '''Um arquivo por matriz, nomeado por camada e cabeça'''
        document = {'tokens': self.tokens, 'attention': [
            {'layer': 0, 'head': 1, 'matrix': self.matrix},
            {'layer': 1, 'head': 0, 'matrix': self.matrix},
        ]}
        with tempfile.TemporaryDirectory() as tmp:
            paths = write_heatmaps(document, Path(tmp), 'svg')
            self.assertEqual([p.name for p in paths], ['layer0_head1.svg', 'layer1_head0.svg'])
            self.assertTrue(all(p.stat().st_size > 0 for p in paths))


if __name__ == '__main__':
    unittest.main()
