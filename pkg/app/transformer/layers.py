'''
Núcleos de propagação direta e retropropagação (numpy)

Cada função direta devolve (saída, cache); a função *_backward correspondente
recebe o gradiente da saída e o cache e devolve os gradientes das entradas
e dos parâmetros.
'''

import math

import numpy as np
from scipy.special import softmax

# GELU, aproximação tanh
GELU_C = math.sqrt(2.0 / math.pi)
GELU_A = 0.044715

# viés aditivo das colunas de padding antes do softmax
MASK_BIAS = -1e9


# ============================================================================
# ELEMENTARES
# ============================================================================

def linear(x, weight, bias):
    return x @ weight + bias


def linear_backward(dy, x, weight):
    d_in = weight.shape[0]
    d_out = weight.shape[1]
    dx = dy @ weight.T
    dweight = x.reshape(-1, d_in).T @ dy.reshape(-1, d_out)
    dbias = dy.reshape(-1, d_out).sum(axis=0)
    return dx, dweight, dbias


def gelu(x):
    t = np.tanh(GELU_C * (x + GELU_A * x ** 3))
    return 0.5 * x * (1.0 + t), (x, t)


def gelu_backward(dy, cache):
    x, t = cache
    dinner = GELU_C * (1.0 + 3.0 * GELU_A * x ** 2)
    return dy * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t ** 2) * dinner)


def layer_norm(x, gamma, beta, eps):
    mean = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (x - mean) * inv_std
    return xhat * gamma + beta, (xhat, inv_std, gamma)


def layer_norm_backward(dy, cache):
    xhat, inv_std, gamma = cache
    d = xhat.shape[-1]
    dgamma = (dy * xhat).reshape(-1, d).sum(axis=0)
    dbeta = dy.reshape(-1, d).sum(axis=0)
    dxhat = dy * gamma
    dx = inv_std * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dgamma, dbeta


def dropout(x, rate, rng):
    '''Dropout invertido; sem rng (modo avaliação) é a identidade'''
    if rng is None or rate <= 0.0:
        return x, None
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / x.dtype.type(1.0 - rate)
    return x * keep, keep


def dropout_backward(dy, keep):
    return dy if keep is None else dy * keep


# ============================================================================
# ATENÇÃO
# ============================================================================

def key_padding_bias(attention_mask):
    '''
    Viés (B, 1, 1, L) em float64: 0 nas colunas reais, MASK_BIAS no padding

    Linhas sem nenhuma posição real atendem à posição 0 (<s>).
    '''
    keys = np.asarray(attention_mask).astype(bool).copy()
    empty = ~keys.any(axis=-1)
    keys[empty, 0] = True
    return np.where(keys, 0.0, MASK_BIAS)[:, None, None, :]


def split_heads(x, n_heads):
    batch, length, d_model = x.shape
    return x.reshape(batch, length, n_heads, d_model // n_heads).transpose(0, 2, 1, 3)


def merge_heads(x):
    batch, n_heads, length, head_dim = x.shape
    return x.transpose(0, 2, 1, 3).reshape(batch, length, n_heads * head_dim)


def self_attention(x, bias, params, n_heads):
    '''
    Atenção multi-cabeça

    Args:
        x: (B, L, D)
        bias: viés aditivo (B, 1, 1, L)
        params: dict com query/key/value/output .weight/.bias
        n_heads: número de cabeças

    Returns:
        (saída (B, L, D), probabilidades float64 (B, H, L, L), cache)
    '''
    q = split_heads(linear(x, params['query.weight'], params['query.bias']), n_heads)
    k = split_heads(linear(x, params['key.weight'], params['key.bias']), n_heads)
    v = split_heads(linear(x, params['value.weight'], params['value.bias']), n_heads)
    scale = 1.0 / math.sqrt(q.shape[-1])

    # softmax sempre em 64 bits
    scores = (q @ k.swapaxes(-1, -2)).astype(np.float64) * scale + bias
    probs = softmax(scores, axis=-1)
    probs_x = probs.astype(x.dtype, copy=False)

    context = merge_heads(probs_x @ v)
    out = linear(context, params['output.weight'], params['output.bias'])
    return out, probs, (x, q, k, v, probs_x, context, scale)


def self_attention_backward(dout, cache, params, n_heads):
    x, q, k, v, probs, context, scale = cache
    grads = {}

    dcontext, grads['output.weight'], grads['output.bias'] = linear_backward(dout, context, params['output.weight'])
    dcontext = split_heads(dcontext, n_heads)

    dprobs = dcontext @ v.swapaxes(-1, -2)
    dv = probs.swapaxes(-1, -2) @ dcontext
    dscores = probs * (dprobs - (dprobs * probs).sum(axis=-1, keepdims=True))
    dq = (dscores @ k) * scale
    dk = (dscores.swapaxes(-1, -2) @ q) * scale

    dx = np.zeros_like(x)
    for name, dproj in (('query', dq), ('key', dk), ('value', dv)):
        dx_part, grads[f'{name}.weight'], grads[f'{name}.bias'] = linear_backward(
            merge_heads(dproj), x, params[f'{name}.weight']
        )
        dx += dx_part
    return dx, grads
