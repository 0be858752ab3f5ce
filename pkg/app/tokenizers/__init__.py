'''
Tokenizadores: regex SMILES e BPE, com tokens especiais, truncagem e padding
'''

from app.tokenizers.bpe import BpeMerges, bpe_encode, bpe_train
from app.tokenizers.encoding import TokenSequence, Tokenizer, collate, encode_for_model
from app.tokenizers.regex_tokenizer import SMILES_REGEX, build_regex_vocab, regex_tokenize, regex_tokenize_spans
from app.tokenizers.vocab import SPECIAL_TOKENS, Vocab

__all__ = [
    'BpeMerges',
    'SMILES_REGEX',
    'SPECIAL_TOKENS',
    'TokenSequence',
    'Tokenizer',
    'Vocab',
    'bpe_encode',
    'bpe_train',
    'build_regex_vocab',
    'collate',
    'encode_for_model',
    'regex_tokenize',
    'regex_tokenize_spans',
]
