import json
import tempfile
import unittest
from pathlib import Path

import numpy as np

from app.errors import ManifestError
from app.utils.artifacts import atomic_write_text, dumps_json, manifest_path, verify_manifest, write_manifest


class TestArtifacts(unittest.TestCase):
    '''Testes de escrita atômica e manifestos'''

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def test_atomic_write_creates_parents(self):
        '''Diretórios intermediários são criados e não sobra temporário'''
        path = self.dir / 'a' / 'b' / 'out.txt'
        atomic_write_text(path, 'CCO\n')
        self.assertEqual(path.read_text(encoding='utf-8'), 'CCO\n')
        self.assertEqual(sorted(p.name for p in path.parent.iterdir()), ['out.txt'])

    def test_dumps_numpy(self):
        '''Tipos NumPy e tuplas viram JSON nativo'''
        text = dumps_json({'n': np.int64(3), 'x': np.float64(0.5), 'v': np.arange(2), 't': (1, 2)})
        self.assertEqual(json.loads(text), {'n': 3, 'x': 0.5, 'v': [0, 1], 't': [1, 2]})
        self.assertTrue(text.endswith('\n'))

    def test_manifest_detects_tampering(self):
        '''Saída alterada ou removida aparece na verificação'''
        source = self.dir / 'in.smi'
        output = self.dir / 'out.smi'
        atomic_write_text(source, 'CCO\n')
        atomic_write_text(output, 'OCC\n')
        manifest = write_manifest(output, 'curate', seed=1, settings={'DEDUP_MODE': 'canonical'}, inputs=[source])
        self.assertEqual(manifest, manifest_path(output))
        self.assertEqual(verify_manifest(manifest), [])

        output.write_text('CCN\n', encoding='utf-8')
        self.assertEqual(verify_manifest(manifest), [(str(output), 'hash divergente')])
        source.unlink()
        self.assertIn((str(source), 'ausente'), verify_manifest(manifest))

    def test_manifest_is_reproducible(self):
        '''Mesmas entradas, mesmo manifesto byte a byte'''
        output = self.dir / 'out.smi'
        atomic_write_text(output, 'CCO\n')
        first = write_manifest(output, 'curate', seed=7).read_bytes()
        second = write_manifest(output, 'curate', seed=7).read_bytes()
        self.assertEqual(first, second)

    def test_malformed_manifest(self):
        '''Manifesto ilegível gera ManifestError'''
        path = self.dir / 'bad.manifest.json'
        path.write_text('{"inputs": 1', encoding='utf-8')
        with self.assertRaises(ManifestError):
            verify_manifest(path)
        with self.assertRaises(ManifestError):
            verify_manifest(self.dir / 'missing.manifest.json')


if __name__ == '__main__':
    unittest.main()
