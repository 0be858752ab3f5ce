'''
app/__init__.py

Plataforma de linguagem molecular: SMILES/SELFIES, tokenizadores, encoder
transformer em numpy, pré-treino MLM, ajuste fino e baseline.

Inicialização da CLI. Módulos: dados, tokenizador, treino, baseline, atenção, manifestos
'''

import logging
import sys

__version__ = '1.0.0'

LOG_FORMAT = '%(levelname)s %(message)s'


def configure_logging(verbose=False):
    '''
    Instalar um único handler em stderr para a hierarquia "app"

    Chamado apenas pela CLI; a biblioteca nunca configura logging sozinha.
    '''
    root = logging.getLogger('app')
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    root.propagate = False
    return root


def create_cli():
    '''Montar o grupo click e registrar os subcomandos de cada área'''
    from app.commands.common import cli

    # ========================================================================
    # REGISTRAR COMANDOS
    # ========================================================================
    # Nota: a ordem de registro define a ordem na ajuda

    from app.commands import attention, baseline, data, manifest, tokenizer, training

    for module in (data, tokenizer, training, baseline, attention, manifest):
        for command in module.COMMANDS:
            cli.add_command(command)
    return cli
