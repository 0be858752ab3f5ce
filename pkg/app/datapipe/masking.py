'''
Mascaramento dinâmico para MLM

Cada posição real e não especial é selecionada com probabilidade mask_rate;
das selecionadas, 80% viram <mask>, 10% um token aleatório (uniforme sobre os
ids não especiais) e 10% ficam inalteradas. Rótulos carregam o id original
nas posições selecionadas e IGNORE_INDEX nas demais.

A aleatoriedade é derivada de (seed, epoch): cada época remascara.
'''

from dataclasses import dataclass

import numpy as np

from app.tokenizers.vocab import IGNORE_INDEX, MASK_ID, N_SPECIAL

DEFAULT_MASK_RATE = 0.15
DEFAULT_MASK_FRACTION = 0.8
DEFAULT_RANDOM_FRACTION = 0.1


@dataclass(frozen=True)
class MlmExample:
    input_ids: np.ndarray
    attention_mask: np.ndarray
    labels: np.ndarray

    @property
    def n_selected(self):
        return int((self.labels != IGNORE_INDEX).sum())

    def restored(self):
        '''Sequência original: posições corrompidas recebem seus rótulos'''
        ids = self.input_ids.copy()
        selected = self.labels != IGNORE_INDEX
        ids[selected] = self.labels[selected]
        return ids


def make_mlm_examples(sequences, vocab, mask_rate=DEFAULT_MASK_RATE, seed=0, epoch=0,
                      mask_fraction=DEFAULT_MASK_FRACTION, random_fraction=DEFAULT_RANDOM_FRACTION):
    '''
    Gerar exemplos MLM a partir de TokenSequence

    Args:
        sequences: iterável de TokenSequence
        vocab: Vocab (ids especiais nunca são corrompidos)
        mask_rate: probabilidade de seleção por posição, em (0, 1)
        seed, epoch: semente do gerador (fresca a cada época)
        mask_fraction, random_fraction: divisão das posições selecionadas

    Yields:
        MlmExample
    '''
    if not 0.0 < mask_rate < 1.0:
        raise ValueError(f'mask_rate deve estar em (0, 1) (recebido {mask_rate})')
    if mask_fraction < 0 or random_fraction < 0 or mask_fraction + random_fraction > 1.0:
        raise ValueError('Frações de corrupção inválidas')

    rng = np.random.default_rng((seed, epoch))
    special = np.array(sorted(vocab.special_ids), dtype=np.int64)
    vocab_size = len(vocab)
    can_randomize = vocab_size > N_SPECIAL

    for seq in sequences:
        ids = np.asarray(seq.ids, dtype=np.int64)
        mask = np.asarray(seq.attention_mask, dtype=np.int64)
        length = ids.shape[0]

        # sorteios de tamanho fixo por sequência: o fluxo do gerador não depende do conteúdo
        select_draw = rng.random(length)
        action_draw = rng.random(length)
        random_ids = rng.integers(N_SPECIAL, max(vocab_size, N_SPECIAL + 1), size=length)

        candidates = (mask == 1) & ~np.isin(ids, special)
        selected = candidates & (select_draw < mask_rate)

        labels = np.full(length, IGNORE_INDEX, dtype=np.int64)
        labels[selected] = ids[selected]

        corrupted = ids.copy()
        to_mask = selected & (action_draw < mask_fraction)
        corrupted[to_mask] = MASK_ID
        if can_randomize:
            to_random = selected & (action_draw >= mask_fraction) & (action_draw < mask_fraction + random_fraction)
            corrupted[to_random] = random_ids[to_random]

        yield MlmExample(input_ids=corrupted, attention_mask=mask.copy(), labels=labels)


def collate_mlm(examples):
    '''Empilhar exemplos MLM em arrays (B, L) cortados no maior comprimento real'''
    examples = list(examples)
    if not examples:
        raise ValueError('Lote vazio')
    length = max(1, max(int(e.attention_mask.sum()) for e in examples))
    ids = np.stack([e.input_ids[:length] for e in examples])
    mask = np.stack([e.attention_mask[:length] for e in examples])
    labels = np.stack([e.labels[:length] for e in examples])
    return ids, mask, labels
