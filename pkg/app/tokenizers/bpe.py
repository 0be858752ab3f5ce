'''
Byte-Pair Encoding sobre caracteres

Treino: alfabeto base = caracteres do corpus; a cada passo o par adjacente
mais frequente vira um novo token (empate: par lexicograficamente menor).
Não há pré-tokenização: cada linha do corpus é uma "palavra".

Codificação: aplica o par de menor posto presente, todas as ocorrências
não sobrepostas da esquerda para a direita, até não haver par aplicável.
'''

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property

from tqdm import tqdm

from app.errors import EmptyCorpus, VocabularyError
from app.tokenizers.vocab import MAX_VOCAB_SIZE, N_SPECIAL, UNK_TOKEN, Vocab

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BpeMerges:
    pairs: tuple = ()

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, index):
        return self.pairs[index]

    @cached_property
    def ranks(self):
        # primeira ocorrência de um par define o posto
        ranks = {}
        for rank, pair in enumerate(self.pairs):
            ranks.setdefault(pair, rank)
        return ranks

    def prefix(self, n):
        return BpeMerges(self.pairs[:n])


def _merge_symbols(symbols, pair):
    left, right = pair
    merged = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
            merged.append(left + right)
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return merged


def _word_pairs(symbols):
    return Counter(zip(symbols, symbols[1:]))


def bpe_train(corpus, target_vocab_size, show_progress=False):
    '''
    Treinar BPE em nível de caractere

    Args:
        corpus: iterável de strings (uma molécula por item)
        target_vocab_size: tamanho máximo do vocabulário (inclui especiais)
        show_progress: barra de progresso tqdm

    Returns:
        (Vocab, BpeMerges)

    Raises:
        EmptyCorpus: nenhuma linha não vazia
        VocabularyError: alvo não cabe acima do alfabeto base + especiais
    '''
    word_counts = Counter(line.strip() for line in corpus)
    word_counts.pop('', None)
    if not word_counts:
        raise EmptyCorpus('Corpus vazio para treino de BPE')

    alphabet = sorted({ch for word in word_counts for ch in word})
    if target_vocab_size > MAX_VOCAB_SIZE:
        raise VocabularyError(f'Vocabulário alvo {target_vocab_size} excede {MAX_VOCAB_SIZE}')
    if target_vocab_size <= len(alphabet) + N_SPECIAL:
        raise VocabularyError(
            f'Vocabulário alvo {target_vocab_size} deve exceder alfabeto ({len(alphabet)}) + especiais ({N_SPECIAL})'
        )

    words = [list(word) for word in sorted(word_counts)]
    counts = [word_counts[''.join(w)] for w in words]

    pair_counts = Counter()
    pair_index = defaultdict(set)
    for wid, symbols in enumerate(words):
        for pair, n in _word_pairs(symbols).items():
            pair_counts[pair] += n * counts[wid]
            pair_index[pair].add(wid)

    tokens = list(alphabet)
    known = set(tokens) | {UNK_TOKEN}
    merges = []

    progress = tqdm(total=target_vocab_size - N_SPECIAL - len(tokens), disable=not show_progress, desc='BPE')
    while N_SPECIAL + len(tokens) < target_vocab_size:
        candidates = [(pair, n) for pair, n in pair_counts.items() if n > 0]
        if not candidates:
            logger.info('[BPE] Sem pares restantes após %d merges', len(merges))
            break
        best, best_count = min(candidates, key=lambda item: (-item[1], item[0]))
        merges.append(best)
        new_token = best[0] + best[1]
        if new_token not in known:
            known.add(new_token)
            tokens.append(new_token)
            progress.update(1)

        for wid in sorted(pair_index.pop(best, ())):
            old = words[wid]
            for pair, n in _word_pairs(old).items():
                pair_counts[pair] -= n * counts[wid]
            new = _merge_symbols(old, best)
            words[wid] = new
            for pair, n in _word_pairs(new).items():
                pair_counts[pair] += n * counts[wid]
                pair_index[pair].add(wid)
        pair_counts.pop(best, None)

        if len(merges) % 100 == 0:
            logger.info('[BPE] %d merges, vocabulário %d (último par %r, freq=%d)',
                        len(merges), N_SPECIAL + len(tokens), best, best_count)
    progress.close()

    return Vocab.from_tokens(tokens), BpeMerges(tuple(merges))


def bpe_segment(text, merges):
    '''Segmentação em peças (sem mapear desconhecidos)'''
    if not isinstance(merges, BpeMerges):
        merges = BpeMerges(tuple(tuple(pair) for pair in merges))
    ranks = merges.ranks
    symbols = list(text)
    while len(symbols) > 1:
        present = [ranks[pair] for pair in zip(symbols, symbols[1:]) if pair in ranks]
        if not present:
            break
        symbols = _merge_symbols(symbols, merges[min(present)])
    return symbols


def bpe_encode(text, vocab, merges):
    '''
    Codificar uma string com as merges treinadas

    Returns:
        lista de tokens; peças fora do vocabulário viram <unk>
    '''
    return [piece if piece in vocab else UNK_TOKEN for piece in bpe_segment(text, merges)]
