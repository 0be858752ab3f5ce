'''
Tokenizador SMILES por expressão regular

Padrão fixado da literatura de predição de reações: átomos entre colchetes,
halogênios de duas letras, átomos do subconjunto orgânico (e aromáticos),
símbolos de ligação/ramificação e dígitos de anel (incluindo %nn).
'''

import re
from collections import Counter

from app.errors import TokenizationGap
from app.tokenizers.vocab import MAX_VOCAB_SIZE, N_SPECIAL, Vocab

SMILES_REGEX = (
    r"(\[[^\]]+]|Br?|Cl?|N|O|S|P|F|I|b|c|n|o|s|p|\(|\)|\.|=|#|-|\+|\\|\/|:|~|@|\?|>|\*|\$|\%[0-9]{2}|[0-9])"
)
SMILES_PATTERN = re.compile(SMILES_REGEX)


def regex_tokenize_spans(smiles):
    '''
    Tokens com seus intervalos [início, fim) na string original

    Raises:
        TokenizationGap: se algum caractere não for consumido pelo padrão
    '''
    spans = []
    position = 0
    while position < len(smiles):
        match = SMILES_PATTERN.match(smiles, position)
        if match is None:
            raise TokenizationGap(smiles, position)
        spans.append((match.group(), match.start(), match.end()))
        position = match.end()
    return spans


def regex_tokenize(smiles):
    '''
    Tokenizar SMILES sem perdas: ''.join(tokens) == smiles

    Exemplo:
        >>> regex_tokenize('CC(=O)O')
        ['C', 'C', '(', '=', 'O', ')', 'O']
    '''
    return [token for token, _, _ in regex_tokenize_spans(smiles)]


def build_regex_vocab(corpus, max_size=MAX_VOCAB_SIZE):
    '''
    Vocabulário do tokenizador regex ordenado por frequência (empates pelo token)

    Linhas não tokenizáveis são ignoradas.
    '''
    counts = Counter()
    for line in corpus:
        try:
            counts.update(regex_tokenize(line.strip()))
        except TokenizationGap:
            continue
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    keep = max(0, max_size - N_SPECIAL)
    return Vocab.from_tokens(token for token, _ in ranked[:keep])
