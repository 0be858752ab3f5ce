import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from app.errors import (
    AllPositionsIgnored,
    CheckpointError,
    ConfigMismatch,
    CorruptCheckpoint,
    InvalidModelConfig,
    ShapeMismatch,
)
from app.tokenizers.vocab import IGNORE_INDEX
from app.transformer.checkpoint import Checkpoint, checkpoint_bytes, checkpoint_from_bytes, load_checkpoint, save_checkpoint
from app.transformer.encoder import MolecularTransformer, numerical_gradient, reset_classifier
from app.transformer.model_config import ModelConfig
from app.transformer.optimizer import AdamHyper, AdamState, adam_step
from tests.helpers import regex_tokenizer, tiny_model_config


def gradient_config():
    return ModelConfig(n_layers=2, n_heads=2, d_model=8, d_ff=16, vocab_size=12, max_positions=16,
                       dropout_rate=0.0, initializer_range=0.3, dtype='float64')


def toy_batch():
    '''Duas sequências, a segunda com preenchimento'''
    ids = np.array([[2, 5, 6, 7, 8, 9, 3], [2, 10, 11, 3, 0, 0, 0]], dtype=np.int64)
    mask = (np.arange(7)[None, :] < np.array([[7], [4]])).astype(np.int64)
    labels = np.full(ids.shape, IGNORE_INDEX, dtype=np.int64)
    labels[0, 2] = 6
    labels[0, 5] = 9
    labels[1, 1] = 10
    return (ids, mask), labels


def straight_line_mlm_logits(params, ids, eps):
    '''Uma camada, uma cabeça, token a token, sem lotes nem código compartilhado'''
    prefix = 'layers.0.'

    def param(name):
        return params[prefix + name]

    def norm(v, gamma, beta):
        mu = sum(v) / len(v)
        var = sum((value - mu) ** 2 for value in v) / len(v)
        return np.array([(value - mu) / math.sqrt(var + eps) for value in v]) * gamma + beta

    def gelu(u):
        return np.array([0.5 * a * (1.0 + math.tanh(math.sqrt(2.0 / math.pi) * (a + 0.044715 * a ** 3))) for a in u])

    x = [params['embeddings.token'][t] + params['embeddings.position'][i] for i, t in enumerate(ids)]
    q = [v @ param('attention.query.weight') + param('attention.query.bias') for v in x]
    k = [v @ param('attention.key.weight') + param('attention.key.bias') for v in x]
    val = [v @ param('attention.value.weight') + param('attention.value.bias') for v in x]
    scale = math.sqrt(len(x[0]))

    logits = []
    for i in range(len(ids)):
        scores = [float(q[i] @ k[j]) / scale for j in range(len(ids))]
        top = max(scores)
        weights = [math.exp(s - top) for s in scores]
        total = sum(weights)
        context = sum((w / total) * val[j] for j, w in enumerate(weights))
        attended = context @ param('attention.output.weight') + param('attention.output.bias')
        h1 = norm(x[i] + attended, param('attention.norm.gamma'), param('attention.norm.beta'))
        inner = gelu(h1 @ param('ffn.inner.weight') + param('ffn.inner.bias'))
        h2 = norm(h1 + inner @ param('ffn.outer.weight') + param('ffn.outer.bias'),
                  param('ffn.norm.gamma'), param('ffn.norm.beta'))
        logits.append(h2 @ params['mlm_head.weight'] + params['mlm_head.bias'])
    return np.array(logits)


class TestGradients(unittest.TestCase):
    '''Gradientes analíticos contra diferenças centrais'''

    def check_mode(self, mode, labels):
        model = MolecularTransformer(gradient_config(), seed=4)
        batch, _ = toy_batch()
        _, grads = model.loss_and_grads(batch, labels, mode=mode)
        rng = np.random.default_rng(0)

        def loss_fn():
            return model.loss_and_grads(batch, labels, mode=mode)[0]

        for name, array in model.params.items():
            for flat in rng.choice(array.size, size=min(5, array.size), replace=False):
                index = np.unravel_index(flat, array.shape)
                numeric = numerical_gradient(loss_fn, array, index)
                analytic = grads[name][index]
                scale = max(abs(numeric), abs(analytic), 1e-4)
                with self.subTest(name=name, index=index):
                    self.assertLessEqual(abs(numeric - analytic) / scale, 1e-5)

    def test_mlm_gradients(self):
        '''Modo MLM: todos os tensores'''
        _, labels = toy_batch()
        self.check_mode('mlm', labels)

    def test_classify_gradients(self):
        '''Modo classificação: todos os tensores'''
        self.check_mode('classify', np.array([1, 0]))

    def test_unused_head_has_zero_gradient(self):
        '''Cabeça fora do caminho da perda recebe gradiente zero'''
        model = MolecularTransformer(gradient_config(), seed=1)
        batch, labels = toy_batch()
        _, grads = model.loss_and_grads(batch, labels, mode='mlm')
        self.assertFalse(np.any(grads['classifier.weight']))
        _, grads = model.loss_and_grads(batch, np.array([0, 1]), mode='classify')
        self.assertFalse(np.any(grads['mlm_head.weight']))


class TestForward(unittest.TestCase):
    '''Propagação direta e validação de entradas'''

    def setUp(self):
        self.model = MolecularTransformer(gradient_config(), seed=2)

    def test_attention_rows_sum_to_one(self):
        '''Cada linha de atenção é uma distribuição sobre as posições reais'''
        batch, _ = toy_batch()
        _, records = self.model.forward_mlm(batch, capture_attention=True)
        self.assertEqual(len(records[0]), 4)
        self.assertEqual(records[1][0].matrix.shape, (4, 4))
        for per_sequence in records:
            for record in per_sequence:
                np.testing.assert_allclose(record.matrix.sum(axis=1), 1.0, atol=1e-9)

    def test_padding_does_not_leak(self):
        '''Preenchimento extra não altera as saídas das posições reais'''
        ids = np.array([[2, 5, 6, 3]])
        mask = np.ones_like(ids)
        short, _ = self.model.forward_mlm((ids, mask))
        padded_ids = np.concatenate([ids, np.zeros((1, 5), dtype=np.int64)], axis=1)
        padded_mask = np.concatenate([mask, np.zeros((1, 5), dtype=np.int64)], axis=1)
        long, _ = self.model.forward_mlm((padded_ids, padded_mask))
        np.testing.assert_allclose(long[:, :4], short, atol=1e-10)

    def test_matches_straight_line_attention(self):
        '''Uma camada e uma cabeça: mesma saída que a conta feita à mão'''
        config = ModelConfig(n_layers=1, n_heads=1, d_model=8, d_ff=16, vocab_size=12, max_positions=8,
                             dropout_rate=0.0, initializer_range=0.3, dtype='float64')
        model = MolecularTransformer(config, seed=5)
        ids = [2, 7, 3]
        logits, _ = model.forward_mlm((np.array([ids]), np.ones((1, 3), dtype=np.int64)))
        expected = straight_line_mlm_logits(model.params, ids, config.layer_norm_eps)
        np.testing.assert_allclose(logits[0], expected, atol=1e-10, rtol=0)

    def test_probabilities(self):
        '''predict_proba em [0, 1]'''
        batch, _ = toy_batch()
        proba = self.model.predict_proba(batch)
        self.assertEqual(proba.shape, (2,))
        self.assertTrue(np.all((proba >= 0) & (proba <= 1)))

    def test_invalid_inputs(self):
        '''Ids fora do vocabulário, sequência longa demais e rótulos ignorados'''
        with self.assertRaises(ShapeMismatch):
            self.model.forward_mlm((np.array([[2, 99]]), np.ones((1, 2), dtype=np.int64)))
        with self.assertRaises(ShapeMismatch):
            self.model.forward_mlm((np.full((1, 20), 5), np.ones((1, 20), dtype=np.int64)))
        batch, labels = toy_batch()
        with self.assertRaises(AllPositionsIgnored):
            self.model.loss_and_grads(batch, np.full_like(labels, IGNORE_INDEX))

    def test_dropout_uses_generator(self):
        '''Mesmo gerador, mesma perda; sem gerador o dropout não atua'''
        model = MolecularTransformer(tiny_model_config(12, dropout_rate=0.3, dtype='float64'), seed=0)
        batch, labels = toy_batch()
        a = model.loss_and_grads(batch, labels, rng=np.random.default_rng(9))[0]
        b = model.loss_and_grads(batch, labels, rng=np.random.default_rng(9))[0]
        clean = model.loss_and_grads(batch, labels)[0]
        self.assertEqual(a, b)
        self.assertNotEqual(a, clean)

    def test_reset_classifier(self):
        '''Nova cabeça de classificação; demais tensores intactos'''
        config = gradient_config()
        params = self.model.params
        reset = reset_classifier(params, config, seed=3)
        self.assertFalse(np.any(reset['classifier.bias']))
        self.assertFalse(np.array_equal(reset['classifier.weight'], params['classifier.weight']))
        self.assertIs(reset['embeddings.token'], params['embeddings.token'])


class TestModelConfig(unittest.TestCase):
    '''Testes da configuração do modelo'''

    def test_full_scale_mechanisms(self):
        '''6 camadas x 12 cabeças = 72 mecanismos de atenção'''
        config = ModelConfig.full_scale()
        self.assertEqual(config.n_mechanisms, 72)
        self.assertEqual(config.head_dim, 64)

    def test_invalid(self):
        '''d_model indivisível, posições acima do limite e dtype desconhecido'''
        with self.assertRaises(InvalidModelConfig):
            ModelConfig(d_model=10, n_heads=3)
        with self.assertRaises(InvalidModelConfig):
            ModelConfig(max_positions=600)
        with self.assertRaises(InvalidModelConfig):
            ModelConfig(dtype='float16')
        with self.assertRaises(InvalidModelConfig):
            ModelConfig.from_dict({'n_layers': 1, 'width': 3})

    def test_parameter_count(self):
        '''Contagem do modelo bate com a da configuração'''
        config = tiny_model_config(20)
        self.assertEqual(MolecularTransformer(config).parameter_count(), config.parameter_count())


class TestAdam(unittest.TestCase):
    '''Testes do otimizador Adam'''

    def test_first_step(self):
        '''Primeiro passo move cada parâmetro ~lr na direção oposta ao gradiente'''
        params = {'w': np.array([1.0, 2.0])}
        grads = {'w': np.array([0.5, -0.25])}
        new, state = adam_step(params, grads, AdamState(), AdamHyper(learning_rate=1e-3))
        np.testing.assert_allclose(new['w'], [1.0 - 1e-3, 2.0 + 1e-3], atol=1e-9)
        self.assertEqual(state.step, 1)
        np.testing.assert_array_equal(params['w'], [1.0, 2.0])

    def test_weight_decay(self):
        '''Decaimento desacoplado encolhe parâmetros com gradiente zero'''
        params = {'w': np.array([1.0])}
        new, _ = adam_step(params, {'w': np.zeros(1)}, AdamState(), AdamHyper(learning_rate=0.1, weight_decay=0.5))
        np.testing.assert_allclose(new['w'], [0.95])

    def test_zero_gradient_is_fixed_point(self):
        '''Gradiente zero sem decaimento: parâmetros inalterados em todos os passos'''
        params = {'w': np.array([0.3, -1.2, 4.0])}
        state = AdamState()
        for _ in range(10):
            params, state = adam_step(params, {'w': np.zeros(3)}, state, AdamHyper(learning_rate=0.1))
        np.testing.assert_array_equal(params['w'], [0.3, -1.2, 4.0])
        self.assertEqual(state.step, 10)

    def test_constant_gradient_moves_by_lr(self):
        '''Gradiente constante: cada passo move cerca de -lr * sinal(g)'''
        lr = 1e-2
        params = {'w': np.array([1.0, 1.0, 1.0])}
        grads = {'w': np.array([3.0, -0.02, 250.0])}
        state = AdamState()
        for _ in range(20):
            new, state = adam_step(params, grads, state, AdamHyper(learning_rate=lr))
            np.testing.assert_allclose(new['w'] - params['w'], -lr * np.sign(grads['w']), rtol=1e-4)
            params = new

    def test_mismatch(self):
        '''Nomes ou formas divergentes'''
        params = {'w': np.zeros(2)}
        with self.assertRaises(ShapeMismatch):
            adam_step(params, {'u': np.zeros(2)}, AdamState(), AdamHyper())
        with self.assertRaises(ShapeMismatch):
            adam_step(params, {'w': np.zeros(3)}, AdamState(), AdamHyper())


class TestCheckpoint(unittest.TestCase):
    '''Testes do formato de checkpoint'''

    def setUp(self):
        self.tokenizer = regex_tokenizer()
        self.config = tiny_model_config(len(self.tokenizer.vocab))
        model = MolecularTransformer(self.config, seed=0)
        grads = {name: np.ones_like(value) for name, value in model.params.items()}
        params, state = adam_step(model.params, grads, AdamState(), AdamHyper())
        self.checkpoint = Checkpoint(self.config, params, step=1, optimizer=state,
                                     tokenizer=self.tokenizer, metadata={'stage': 'pretrain'})

    def test_round_trip(self):
        '''Salvar, ler e salvar de novo gera bytes idênticos'''
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'model.ckpt'
            save_checkpoint(self.checkpoint, path)
            loaded = load_checkpoint(path, expected_config=self.config)
        self.assertEqual(checkpoint_bytes(loaded), checkpoint_bytes(self.checkpoint))
        self.assertEqual(loaded.optimizer.step, 1)
        self.assertEqual(loaded.metadata['stage'], 'pretrain')
        self.assertEqual(loaded.tokenizer.vocab, self.tokenizer.vocab)
        for name, value in self.checkpoint.params.items():
            np.testing.assert_array_equal(loaded.params[name], value)

    def test_corrupt(self):
        '''Assinatura errada, truncagem e cabeçalho ilegível'''
        data = checkpoint_bytes(self.checkpoint)
        for broken in (b'XXXXXXXX' + data[8:], data[:len(data) // 2], data[:12], data[:16] + b'\xff' * 8):
            with self.assertRaises(CorruptCheckpoint):
                checkpoint_from_bytes(broken)

    def test_config_mismatch(self):
        '''Configuração estrutural diferente da esperada'''
        data = checkpoint_bytes(self.checkpoint)
        with self.assertRaises(ConfigMismatch):
            checkpoint_from_bytes(data, expected_config=tiny_model_config(len(self.tokenizer.vocab) + 1))

    def test_missing_file(self):
        '''Arquivo inexistente'''
        with self.assertRaises(CheckpointError):
            load_checkpoint('/nao/existe/model.ckpt')


if __name__ == '__main__':
    unittest.main()
