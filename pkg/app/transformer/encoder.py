'''
Encoder transformer estilo RoBERTa com gradientes analíticos

Arquitetura (pós-norma):
    embeddings (token + posição aprendida) -> dropout
    n_layers x [atenção multi-cabeça -> dropout -> soma & norma
                -> FFN (GELU) -> dropout -> soma & norma]
    cabeça MLM: projeção linear para logits do vocabulário
    cabeça de classificação: saída na posição <s> -> linear -> 2 logits

Dropout só atua quando um gerador (rng) é passado (modo treino).
'''

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, softmax
from scipy.stats import truncnorm

from app.errors import AllPositionsIgnored, NonFiniteValue, ShapeMismatch
from app.tokenizers.encoding import collate
from app.tokenizers.vocab import IGNORE_INDEX
from app.transformer import layers

logger = logging.getLogger(__name__)

MODES = ('mlm', 'classify')

_ATTENTION_KEYS = tuple(
    f'{proj}.{kind}' for proj in ('query', 'key', 'value', 'output') for kind in ('weight', 'bias')
)


@dataclass(frozen=True)
class AttentionRecord:
    layer: int
    head: int
    matrix: np.ndarray
    tokens: tuple = ()

    def to_dict(self):
        return {'layer': self.layer, 'head': self.head, 'matrix': self.matrix.tolist()}


def init_parameters(config, seed=0):
    '''
    Inicialização: normal truncada em +-2 desvios (std = initializer_range)
    para matrizes e embeddings; vieses e beta zerados; gamma = 1
    '''
    rng = np.random.default_rng(seed)
    dtype = config.np_dtype
    params = {}
    for name, shape in config.parameter_shapes().items():
        if name.endswith('.gamma'):
            value = np.ones(shape)
        elif name.endswith('.bias') or name.endswith('.beta'):
            value = np.zeros(shape)
        else:
            value = truncnorm.rvs(-2.0, 2.0, loc=0.0, scale=config.initializer_range, size=shape, random_state=rng)
        params[name] = np.asarray(value, dtype=dtype)
    return params


def reset_classifier(params, config, seed=0):
    '''Nova cabeça de classificação (pesos normal truncada, viés zero)'''
    rng = np.random.default_rng(seed)
    weight = truncnorm.rvs(-2.0, 2.0, loc=0.0, scale=config.initializer_range,
                           size=(config.d_model, 2), random_state=rng)
    params = dict(params)
    params['classifier.weight'] = np.asarray(weight, dtype=config.np_dtype)
    params['classifier.bias'] = np.zeros(2, dtype=config.np_dtype)
    return params


def as_batch_arrays(batch):
    '''Aceita lista de TokenSequence ou tupla (ids, máscara)'''
    if isinstance(batch, tuple) and len(batch) == 2 and isinstance(batch[0], np.ndarray):
        ids, mask = batch
    else:
        ids, mask = collate(batch)
    return np.asarray(ids, dtype=np.int64), np.asarray(mask, dtype=np.int64)


class MolecularTransformer:
    '''Encoder + cabeças MLM e de classificação sobre um dicionário de parâmetros'''

    def __init__(self, config, params=None, seed=0):
        self.config = config
        self.params = params if params is not None else init_parameters(config, seed)
        self._check_shapes()

    def _check_shapes(self):
        expected = self.config.parameter_shapes()
        if set(expected) != set(self.params):
            missing = sorted(set(expected) - set(self.params))
            extra = sorted(set(self.params) - set(expected))
            raise ShapeMismatch(f'Parâmetros divergentes: faltando {missing[:3]}, sobrando {extra[:3]}')
        for name, shape in expected.items():
            if tuple(self.params[name].shape) != tuple(shape):
                raise ShapeMismatch(f'{name}: forma {self.params[name].shape}, esperada {shape}')

    @property
    def parameter_names(self):
        return list(self.config.parameter_shapes())

    def parameter_count(self):
        return int(sum(p.size for p in self.params.values()))

    def copy_parameters(self):
        return {name: value.copy() for name, value in self.params.items()}

    # ========================================================================
    # PROPAGAÇÃO DIRETA
    # ========================================================================

    def _validate_inputs(self, ids, mask):
        if ids.ndim != 2:
            raise ShapeMismatch(f'ids deve ser (B, L); recebido {ids.shape}')
        if mask.shape != ids.shape:
            raise ShapeMismatch(f'Máscara {mask.shape} difere de ids {ids.shape}')
        if ids.shape[1] > self.config.max_positions:
            raise ShapeMismatch(f'Comprimento {ids.shape[1]} excede max_positions={self.config.max_positions}')
        if ids.size and (ids.min() < 0 or ids.max() >= self.config.vocab_size):
            raise ShapeMismatch(f'Ids fora de [0, {self.config.vocab_size})')

    def _layer(self, layer):
        prefix = f'layers.{layer}.'
        return {name[len(prefix):]: value for name, value in self.params.items() if name.startswith(prefix)}

    def _encode(self, ids, mask, rng=None):
        cfg = self.config
        length = ids.shape[1]
        x = self.params['embeddings.token'][ids] + self.params['embeddings.position'][:length]
        x, embed_keep = layers.dropout(x, cfg.dropout_rate, rng)
        bias = layers.key_padding_bias(mask)

        caches = []
        attention = []
        for layer in range(cfg.n_layers):
            p = self._layer(layer)
            attn_params = {key: p[f'attention.{key}'] for key in _ATTENTION_KEYS}

            attn_out, probs, attn_cache = layers.self_attention(x, bias, attn_params, cfg.n_heads)
            attn_out, attn_keep = layers.dropout(attn_out, cfg.dropout_rate, rng)
            h1, norm1 = layers.layer_norm(x + attn_out, p['attention.norm.gamma'], p['attention.norm.beta'],
                                          cfg.layer_norm_eps)

            inner = layers.linear(h1, p['ffn.inner.weight'], p['ffn.inner.bias'])
            activated, gelu_cache = layers.gelu(inner)
            outer = layers.linear(activated, p['ffn.outer.weight'], p['ffn.outer.bias'])
            outer, ffn_keep = layers.dropout(outer, cfg.dropout_rate, rng)
            h2, norm2 = layers.layer_norm(h1 + outer, p['ffn.norm.gamma'], p['ffn.norm.beta'], cfg.layer_norm_eps)

            caches.append({
                'attn': attn_cache, 'attn_params': attn_params, 'attn_keep': attn_keep, 'norm1': norm1,
                'h1': h1, 'gelu': gelu_cache, 'activated': activated, 'ffn_keep': ffn_keep, 'norm2': norm2,
            })
            attention.append(probs)
            x = h2
        return x, caches, attention, embed_keep

    def _check_finite(self, value, name):
        if np.all(np.isfinite(value)):
            return
        for param_name, param in self.params.items():
            if not np.all(np.isfinite(param)):
                raise NonFiniteValue(param_name)
        raise NonFiniteValue(name)

    def _mlm_logits(self, hidden):
        return layers.linear(hidden, self.params['mlm_head.weight'], self.params['mlm_head.bias'])

    def _classify_logits(self, hidden):
        return layers.linear(hidden[:, 0, :], self.params['classifier.weight'], self.params['classifier.bias'])

    def forward_mlm(self, batch, capture_attention=False, rng=None):
        '''
        Logits MLM (B, L, V) e, opcionalmente, registros de atenção

        Returns:
            (logits, records) onde records[b] é a lista de AttentionRecord
            (camada, cabeça) recortada às posições reais da sequência b
        '''
        ids, mask = as_batch_arrays(batch)
        self._validate_inputs(ids, mask)
        hidden, _, attention, _ = self._encode(ids, mask, rng)
        logits = self._mlm_logits(hidden)
        self._check_finite(logits, 'logits')
        records = attention_records(attention, mask) if capture_attention else None
        return logits, records

    def forward_classify(self, batch, rng=None):
        '''Logits de classificação (B, 2) a partir da posição <s>'''
        ids, mask = as_batch_arrays(batch)
        self._validate_inputs(ids, mask)
        hidden, _, _, _ = self._encode(ids, mask, rng)
        logits = self._classify_logits(hidden)
        self._check_finite(logits, 'logits')
        return logits

    def predict_proba(self, batch):
        '''Probabilidade da classe positiva por linha'''
        logits = self.forward_classify(batch).astype(np.float64)
        return softmax(logits, axis=-1)[:, 1]

    def attention_maps(self, batch):
        _, records = self.forward_mlm(batch, capture_attention=True)
        return records

    # ========================================================================
    # PERDA E GRADIENTES
    # ========================================================================

    def loss_and_grads(self, batch, labels, mode='mlm', rng=None):
        '''
        Entropia cruzada média e gradientes de todos os parâmetros

        Args:
            batch: lote (lista de TokenSequence ou (ids, máscara))
            labels: mlm -> (B, L) com IGNORE_INDEX; classify -> (B,) em {0, 1}
            mode: "mlm" ou "classify"
            rng: gerador para dropout (None desativa)

        Returns:
            (perda float, dict nome -> gradiente); parâmetros fora do caminho
            da perda recebem gradiente exatamente zero

        Raises:
            AllPositionsIgnored: lote MLM sem posições mascaradas
        '''
        if mode not in MODES:
            raise ValueError(f'Modo desconhecido {mode!r} (use {MODES})')
        ids, mask = as_batch_arrays(batch)
        self._validate_inputs(ids, mask)
        labels = np.asarray(labels, dtype=np.int64)
        dtype = self.config.np_dtype
        grads = {name: np.zeros_like(value) for name, value in self.params.items()}

        if mode == 'mlm':
            if labels.shape != ids.shape:
                raise ShapeMismatch(f'Rótulos {labels.shape} diferem de ids {ids.shape}')
            selected = labels != IGNORE_INDEX
            n_selected = int(selected.sum())
            if n_selected == 0:
                raise AllPositionsIgnored('Lote MLM sem posições mascaradas')

        hidden, caches, _, embed_keep = self._encode(ids, mask, rng)

        if mode == 'mlm':
            logits = self._mlm_logits(hidden)
            self._check_finite(logits, 'logits')
            logp = log_softmax(logits.astype(np.float64), axis=-1)
            target_logp = logp[selected, labels[selected]]
            loss = -float(target_logp.mean())

            dlogits = np.zeros(logp.shape, dtype=np.float64)
            dlogits[selected] = np.exp(logp[selected])
            dlogits[selected, labels[selected]] -= 1.0
            dlogits = (dlogits / n_selected).astype(dtype)

            dhidden, grads['mlm_head.weight'], grads['mlm_head.bias'] = layers.linear_backward(
                dlogits, hidden, self.params['mlm_head.weight']
            )
        else:
            if labels.shape != (ids.shape[0],):
                raise ShapeMismatch(f'Rótulos {labels.shape} incompatíveis com lote de {ids.shape[0]}')
            logits = self._classify_logits(hidden)
            self._check_finite(logits, 'logits')
            logp = log_softmax(logits.astype(np.float64), axis=-1)
            rows = np.arange(labels.shape[0])
            loss = -float(logp[rows, labels].mean())

            dlogits = np.exp(logp)
            dlogits[rows, labels] -= 1.0
            dlogits = (dlogits / labels.shape[0]).astype(dtype)

            dcls, grads['classifier.weight'], grads['classifier.bias'] = layers.linear_backward(
                dlogits, hidden[:, 0, :], self.params['classifier.weight']
            )
            dhidden = np.zeros_like(hidden)
            dhidden[:, 0, :] = dcls

        self._backward_encoder(dhidden, ids, caches, embed_keep, grads)
        return loss, grads

    def _backward_encoder(self, dx, ids, caches, embed_keep, grads):
        cfg = self.config
        for layer in reversed(range(cfg.n_layers)):
            cache = caches[layer]
            prefix = f'layers.{layer}.'

            dsum2, grads[prefix + 'ffn.norm.gamma'], grads[prefix + 'ffn.norm.beta'] = layers.layer_norm_backward(
                dx, cache['norm2']
            )
            douter = layers.dropout_backward(dsum2, cache['ffn_keep'])
            dactivated, grads[prefix + 'ffn.outer.weight'], grads[prefix + 'ffn.outer.bias'] = layers.linear_backward(
                douter, cache['activated'], self.params[prefix + 'ffn.outer.weight']
            )
            dinner = layers.gelu_backward(dactivated, cache['gelu'])
            dh1, grads[prefix + 'ffn.inner.weight'], grads[prefix + 'ffn.inner.bias'] = layers.linear_backward(
                dinner, cache['h1'], self.params[prefix + 'ffn.inner.weight']
            )
            dh1 = dh1 + dsum2

            dsum1, grads[prefix + 'attention.norm.gamma'], grads[prefix + 'attention.norm.beta'] = \
                layers.layer_norm_backward(dh1, cache['norm1'])
            dattn = layers.dropout_backward(dsum1, cache['attn_keep'])
            dx_attn, attn_grads = layers.self_attention_backward(
                dattn, cache['attn'], cache['attn_params'], cfg.n_heads
            )
            for key, value in attn_grads.items():
                grads[prefix + 'attention.' + key] = value
            dx = dsum1 + dx_attn

        dembed = layers.dropout_backward(dx, embed_keep)
        np.add.at(grads['embeddings.token'], ids, dembed)
        grads['embeddings.position'][:ids.shape[1]] = dembed.sum(axis=0)


def attention_records(attention, mask, tokens=None):
    '''
    Converter probabilidades (por camada, (B, H, L, L)) em AttentionRecord

    Cada matriz é recortada às posições reais (mínimo 1: a posição <s>).
    '''
    mask = np.asarray(mask)
    records = []
    for b in range(mask.shape[0]):
        n_real = max(1, int(mask[b].sum()))
        row_tokens = tuple(tokens[b][:n_real]) if tokens is not None else ()
        per_sequence = []
        for layer, probs in enumerate(attention):
            for head in range(probs.shape[1]):
                per_sequence.append(AttentionRecord(
                    layer=layer,
                    head=head,
                    matrix=np.array(probs[b, head, :n_real, :n_real], dtype=np.float64),
                    tokens=row_tokens,
                ))
        records.append(per_sequence)
    return records


def numerical_gradient(loss_fn, array, index, step=1e-5):
    '''Diferença central de loss_fn() em relação a array[index] (altera e restaura)'''
    original = array[index]
    array[index] = original + step
    plus = loss_fn()
    array[index] = original - step
    minus = loss_fn()
    array[index] = original
    return (plus - minus) / (2.0 * step)
