'''
Adam com correção de viés e decaimento de peso desacoplado opcional
'''

from dataclasses import dataclass, field

import numpy as np

from app.errors import ShapeMismatch


@dataclass(frozen=True)
class AdamHyper:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0

    @classmethod
    def from_settings(cls, settings):
        return cls(
            learning_rate=float(settings['LEARNING_RATE']),
            beta1=float(settings['ADAM_BETA1']),
            beta2=float(settings['ADAM_BETA2']),
            eps=float(settings['ADAM_EPS']),
            weight_decay=float(settings['WEIGHT_DECAY']),
        )


@dataclass
class AdamState:
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params):
        return cls(
            step=0,
            m={name: np.zeros_like(value) for name, value in params.items()},
            v={name: np.zeros_like(value) for name, value in params.items()},
        )


def adam_step(params, grads, state, hyper):
    '''
    Um passo de Adam

    Args:
        params: dict nome -> array
        grads: dict com as mesmas chaves e formas
        state: AdamState (step, m, v); vazio é inicializado com zeros
        hyper: AdamHyper

    Returns:
        (novos parâmetros, novo estado); as entradas não são alteradas

    Raises:
        ShapeMismatch: chaves ou formas divergentes
    '''
    if set(params) != set(grads):
        raise ShapeMismatch('Gradientes e parâmetros com nomes divergentes')
    if not state.m:
        state = AdamState.zeros_like(params)

    step = state.step + 1
    lr = hyper.learning_rate
    correction1 = 1.0 - hyper.beta1 ** step
    correction2 = 1.0 - hyper.beta2 ** step

    new_params, new_m, new_v = {}, {}, {}
    for name, value in params.items():
        grad = grads[name]
        if grad.shape != value.shape or state.m[name].shape != value.shape:
            raise ShapeMismatch(f'{name}: gradiente {grad.shape}, parâmetro {value.shape}')
        m = hyper.beta1 * state.m[name] + (1.0 - hyper.beta1) * grad
        v = hyper.beta2 * state.v[name] + (1.0 - hyper.beta2) * grad * grad
        update = (m / correction1) / (np.sqrt(v / correction2) + hyper.eps)
        updated = value - lr * update
        if hyper.weight_decay:
            updated = updated - lr * hyper.weight_decay * value
        new_params[name] = updated.astype(value.dtype, copy=False)
        new_m[name] = m.astype(value.dtype, copy=False)
        new_v[name] = v.astype(value.dtype, copy=False)

    return new_params, AdamState(step=step, m=new_m, v=new_v)
