'''
Codificação para o modelo e pacote serializável do tokenizador

Um Tokenizer agrupa o tipo ("regex" ou "bpe"), o vocabulário e as merges,
e é salvo como um único documento JSON UTF-8:

    {"version": 1, "kind": "bpe", "special_tokens": {...},
     "vocab": {token: id}, "merges": [["l", "r"], ...]}
'''

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from app.errors import CorpusIOError, VocabularyError
from app.tokenizers.bpe import BpeMerges, bpe_encode, bpe_segment, bpe_train
from app.tokenizers.regex_tokenizer import build_regex_vocab, regex_tokenize, regex_tokenize_spans
from app.tokenizers.vocab import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    SPECIAL_TOKENS,
    UNK_TOKEN,
    Vocab,
)
from app.utils.artifacts import atomic_write_text

FORMAT_VERSION = 1
MAX_SEQUENCE_LENGTH = 512
TOKENIZER_KINDS = ('regex', 'bpe')


@dataclass(frozen=True)
class TokenSequence:
    ids: np.ndarray
    attention_mask: np.ndarray
    overflow: bool = False

    def __len__(self):
        return int(self.ids.shape[0])

    @property
    def n_real(self):
        return int(self.attention_mask.sum())

    def __eq__(self, other):
        if not isinstance(other, TokenSequence):
            return NotImplemented
        return (
            self.overflow == other.overflow
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.attention_mask, other.attention_mask)
        )


def encode_for_model(tokens, vocab, max_len):
    '''
    Adicionar <s> ... </s>, truncar e preencher com <pad>

    Na truncagem o </s> ocupa a última posição real e overflow fica True.

    Args:
        tokens: lista de strings de token
        vocab: Vocab
        max_len: comprimento final (>= 3)
    '''
    if max_len < 3:
        raise ValueError(f'max_len deve ser >= 3 (recebido {max_len})')
    body = vocab.ids(tokens)
    overflow = len(body) + 2 > max_len
    if overflow:
        body = body[:max_len - 2]
    real = [BOS_ID, *body, EOS_ID]

    ids = np.full(max_len, PAD_ID, dtype=np.int64)
    ids[:len(real)] = real
    mask = np.zeros(max_len, dtype=np.int64)
    mask[:len(real)] = 1
    return TokenSequence(ids=ids, attention_mask=mask, overflow=overflow)


def collate(sequences):
    '''
    Empilhar sequências em arrays (B, L) cortados no maior comprimento real

    Returns:
        (ids, attention_mask) como arrays int64
    '''
    sequences = list(sequences)
    if not sequences:
        raise ValueError('Lote vazio')
    length = max(1, max(seq.n_real for seq in sequences))
    ids = np.stack([seq.ids[:length] for seq in sequences])
    mask = np.stack([seq.attention_mask[:length] for seq in sequences])
    return ids, mask


# ============================================================================
# PACOTE DO TOKENIZADOR
# ============================================================================

@dataclass(frozen=True)
class Tokenizer:
    kind: str
    vocab: Vocab
    merges: BpeMerges = field(default_factory=BpeMerges)

    def __post_init__(self):
        if self.kind not in TOKENIZER_KINDS:
            raise VocabularyError(f'Tipo de tokenizador desconhecido {self.kind!r}')

    # ------------------------------------------------------------------
    @classmethod
    def train(cls, kind, corpus, vocab_size, show_progress=False):
        '''Treinar um tokenizador regex (vocabulário por frequência) ou BPE'''
        corpus = list(corpus)
        if kind == 'bpe':
            vocab, merges = bpe_train(corpus, vocab_size, show_progress=show_progress)
            return cls('bpe', vocab, merges)
        if kind == 'regex':
            return cls('regex', build_regex_vocab(corpus, vocab_size))
        raise VocabularyError(f'Tipo de tokenizador desconhecido {kind!r}')

    def tokenize(self, text):
        if self.kind == 'regex':
            return regex_tokenize(text)
        return bpe_encode(text, self.vocab, self.merges)

    def tokenize_with_spans(self, text):
        '''Lista de (token, início, fim); tokens fora do vocabulário viram <unk>'''
        if self.kind == 'regex':
            pieces = regex_tokenize_spans(text)
        else:
            pieces = []
            position = 0
            for piece in bpe_segment(text, self.merges):
                pieces.append((piece, position, position + len(piece)))
                position += len(piece)
        return [
            (token if token in self.vocab else UNK_TOKEN, start, end)
            for token, start, end in pieces
        ]

    def encode(self, text, max_len=MAX_SEQUENCE_LENGTH):
        return encode_for_model(self.tokenize(text), self.vocab, max_len)

    def decode(self, ids, skip_special=True):
        special = self.vocab.special_ids
        return ''.join(
            self.vocab.token_of(int(i))
            for i in ids
            if not (skip_special and int(i) in special)
        )

    # ------------------------------------------------------------------
    def to_dict(self):
        return {
            'version': FORMAT_VERSION,
            'kind': self.kind,
            'special_tokens': {role: token for role, (token, _) in SPECIAL_TOKENS.items()},
            'vocab': dict(sorted(self.vocab.token_to_id.items(), key=lambda item: item[1])),
            'merges': [list(pair) for pair in self.merges],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + '\n'

    @classmethod
    def from_dict(cls, doc):
        if doc.get('version') != FORMAT_VERSION:
            raise VocabularyError(f'Versão de tokenizador não suportada: {doc.get("version")!r}')
        expected = {role: token for role, (token, _) in SPECIAL_TOKENS.items()}
        if doc.get('special_tokens') != expected:
            raise VocabularyError('Tokens especiais divergentes do padrão <pad> <unk> <s> </s> <mask>')
        merges = BpeMerges(tuple((left, right) for left, right in doc.get('merges', [])))
        kind = doc.get('kind') or ('bpe' if merges else 'regex')
        return cls(kind, Vocab(dict(doc['vocab'])), merges)

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise VocabularyError(f'JSON de tokenizador inválido: {e}') from e
        return cls.from_dict(doc)

    def save(self, path):
        atomic_write_text(path, self.to_json())

    @classmethod
    def load(cls, path):
        try:
            text = Path(path).read_text(encoding='utf-8')
        except OSError as e:
            raise CorpusIOError(f'Falha ao ler tokenizador {path}: {e}') from e
        return cls.from_json(text)
