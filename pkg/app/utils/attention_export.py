'''
Exportação das matrizes de atenção de uma molécula

Documento JSON:
    {"input": str, "tokens": [str], "spans": [[início, fim)],
     "attention": [{"layer": int, "head": int, "matrix": [[float]]}],
     "bracket_diagnostic": [{"layer", "head", "pairs", "mean_attention"}],
     "truncated": bool}

Os spans de <s> e </s> têm largura zero (início e fim do texto); os demais
tokens cobrem o texto de entrada sem lacunas quando o tokenizador é regex.
'''

import logging

import numpy as np

from app.errors import ConfigMismatch
from app.tokenizers.vocab import BOS_TOKEN, EOS_TOKEN
from app.transformer.encoder import MolecularTransformer

logger = logging.getLogger(__name__)

OPEN_BRANCH = '('
CLOSE_BRANCH = ')'


def matching_brackets(tokens):
    '''Pares (índice de ")", índice do "(" correspondente); desbalanceados são ignorados'''
    stack = []
    pairs = []
    for index, token in enumerate(tokens):
        if token == OPEN_BRANCH:
            stack.append(index)
        elif token == CLOSE_BRANCH and stack:
            pairs.append((index, stack.pop()))
    return pairs


def bracket_diagnostic(records, tokens):
    '''
    Massa média de atenção de cada ")" para o "(" correspondente, por cabeça

    Returns:
        lista de {"layer", "head", "pairs", "mean_attention"} (None sem pares)
    '''
    pairs = matching_brackets(tokens)
    rows = []
    for record in records:
        values = [record.matrix[close, open_] for close, open_ in pairs
                  if close < record.matrix.shape[0]]
        rows.append({
            'layer': record.layer,
            'head': record.head,
            'pairs': len(values),
            'mean_attention': float(np.mean(values)) if values else None,
        })
    return rows


def _select(records, layers, heads):
    layers = set(layers or ())
    heads = set(heads or ())
    return [
        r for r in records
        if (not layers or r.layer in layers) and (not heads or r.head in heads)
    ]


def export_attention(checkpoint, text, layers=None, heads=None):
    '''
    Montar o documento de exportação para uma molécula

    Args:
        checkpoint: Checkpoint com tokenizador embutido
        text: SMILES (ou SELFIES, conforme o tokenizador)
        layers, heads: seletores opcionais (vazio = todos)

    Returns:
        dicionário serializável

    Raises:
        ConfigMismatch: checkpoint sem tokenizador ou vocabulário incompatível
        TokenizationGap: texto não tokenizável
    '''
    tokenizer = checkpoint.tokenizer
    if tokenizer is None:
        raise ConfigMismatch('Checkpoint sem tokenizador: exportação de atenção impossível')
    if len(tokenizer.vocab) != checkpoint.config.vocab_size:
        raise ConfigMismatch(
            f'Vocabulário do tokenizador ({len(tokenizer.vocab)}) difere do modelo ({checkpoint.config.vocab_size})'
        )

    pieces = tokenizer.tokenize_with_spans(text)
    sequence = tokenizer.encode(text, checkpoint.config.max_positions)
    body = pieces[:sequence.n_real - 2]
    tokens = [BOS_TOKEN] + [token for token, _, _ in body] + [EOS_TOKEN]
    end = body[-1][2] if body else 0
    spans = [[0, 0]] + [[start, stop] for _, start, stop in body] + [[end, end]]
    if sequence.overflow:
        logger.warning('[ATENÇÃO] Entrada truncada em %d tokens', sequence.n_real)

    model = MolecularTransformer(checkpoint.config, params=checkpoint.params)
    _, records = model.forward_mlm([sequence], capture_attention=True)
    selected = _select(records[0], layers, heads)
    logger.info('[ATENÇÃO] %d tokens, %d de %d matrizes exportadas',
                len(tokens), len(selected), checkpoint.config.n_mechanisms)

    return {
        'input': text,
        'tokens': tokens,
        'spans': spans,
        'attention': [
            {'layer': r.layer, 'head': r.head, 'matrix': r.matrix.tolist()} for r in selected
        ],
        'bracket_diagnostic': bracket_diagnostic(selected, tokens),
        'truncated': bool(sequence.overflow),
    }
