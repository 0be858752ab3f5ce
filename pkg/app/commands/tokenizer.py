'''
Comando train-tokenizer
'''

import click

from app.commands.common import input_argument, out_option, with_overrides
from app.datapipe.corpus import read_corpus
from app.tokenizers.encoding import TOKENIZER_KINDS, Tokenizer
from app.utils.artifacts import write_manifest


@click.command('train-tokenizer')
@input_argument('corpus_path')
@click.option('--kind', type=click.Choice(TOKENIZER_KINDS), default=None, help='regex ou bpe')
@click.option('--vocab-size', type=click.IntRange(min=6), default=None, help='Tamanho do vocabulário')
@out_option('JSON do tokenizador')
@click.pass_obj
def train_tokenizer_command(settings, corpus_path, kind, vocab_size, out_path):
    '''Treinar tokenizador regex (frequência) ou BPE num corpus'''
    settings = with_overrides(settings, TOKENIZER_KIND=kind, VOCAB_SIZE=vocab_size)
    tokenizer = Tokenizer.train(
        settings['TOKENIZER_KIND'],
        read_corpus(corpus_path),
        int(settings['VOCAB_SIZE']),
        show_progress=bool(settings['SHOW_PROGRESS']),
    )
    tokenizer.save(out_path)
    write_manifest(out_path, 'train-tokenizer', None, settings, inputs=[corpus_path])
    click.echo(f'{tokenizer.kind}: {len(tokenizer.vocab)} tokens, {len(tokenizer.merges)} fusões -> {out_path}')


COMMANDS = (train_tokenizer_command,)
