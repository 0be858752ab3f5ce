'''
Vocabulário com tokens especiais de ids fixos
'''

from dataclasses import dataclass, field

from app.errors import VocabularyError

PAD_TOKEN = '<pad>'
UNK_TOKEN = '<unk>'
BOS_TOKEN = '<s>'
EOS_TOKEN = '</s>'
MASK_TOKEN = '<mask>'

# papel -> (token, id)
SPECIAL_TOKENS = {
    'pad': (PAD_TOKEN, 0),
    'unk': (UNK_TOKEN, 1),
    'bos': (BOS_TOKEN, 2),
    'eos': (EOS_TOKEN, 3),
    'mask': (MASK_TOKEN, 4),
}
N_SPECIAL = len(SPECIAL_TOKENS)
MAX_VOCAB_SIZE = 52_000

PAD_ID = SPECIAL_TOKENS['pad'][1]
UNK_ID = SPECIAL_TOKENS['unk'][1]
BOS_ID = SPECIAL_TOKENS['bos'][1]
EOS_ID = SPECIAL_TOKENS['eos'][1]
MASK_ID = SPECIAL_TOKENS['mask'][1]

IGNORE_INDEX = -100


@dataclass(frozen=True)
class Vocab:
    '''
    Bijeção token <-> id

    Os ids 0..4 são reservados para <pad> <unk> <s> </s> <mask>;
    os demais tokens seguem em ordem de inserção.
    '''
    token_to_id: dict = field(default_factory=dict)

    def __post_init__(self):
        ids = sorted(self.token_to_id.values())
        if ids != list(range(len(ids))):
            raise VocabularyError('Ids do vocabulário devem ser contíguos a partir de 0')
        for token, idx in SPECIAL_TOKENS.values():
            if self.token_to_id.get(token) != idx:
                raise VocabularyError(f'Token especial {token!r} deve ter id {idx}')
        if len(ids) > MAX_VOCAB_SIZE:
            raise VocabularyError(f'Vocabulário com {len(ids)} tokens excede {MAX_VOCAB_SIZE}')
        object.__setattr__(self, '_id_to_token', {i: t for t, i in self.token_to_id.items()})

    @classmethod
    def from_tokens(cls, tokens):
        '''Especiais primeiro, depois os tokens dados (duplicatas ignoradas)'''
        mapping = {token: idx for token, idx in SPECIAL_TOKENS.values()}
        for token in tokens:
            if token not in mapping:
                mapping[token] = len(mapping)
        return cls(mapping)

    def __len__(self):
        return len(self.token_to_id)

    def __contains__(self, token):
        return token in self.token_to_id

    @property
    def size(self):
        return len(self.token_to_id)

    @property
    def special_ids(self):
        return frozenset(idx for _, idx in SPECIAL_TOKENS.values())

    def id_of(self, token):
        return self.token_to_id.get(token, UNK_ID)

    def token_of(self, idx):
        try:
            return self._id_to_token[idx]
        except KeyError:
            raise VocabularyError(f'Id {idx} fora do vocabulário') from None

    def ids(self, tokens):
        return [self.id_of(t) for t in tokens]

    def tokens(self, ids):
        return [self.token_of(int(i)) for i in ids]

    def regular_ids(self):
        '''Ids que não são tokens especiais'''
        return list(range(N_SPECIAL, len(self)))
