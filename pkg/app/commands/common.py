'''
Grupo click, opções compartilhadas e tratamento de erros da CLI
'''

from pathlib import Path

import click

from app import __version__, configure_logging
from app.errors import PlatformError
from config import config as profiles
from config import load_settings

MAX_SEED = 2 ** 64 - 1


class PlatformGroup(click.Group):
    '''Erros da plataforma viram código de saída 1 com mensagem em stderr'''

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except PlatformError as e:
            click.echo(f'Erro ({type(e).__name__}): {e}', err=True)
            ctx.exit(1)


@click.group(cls=PlatformGroup)
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='Arquivo JSON com ajustes de configuração')
@click.option('--profile', type=click.Choice(sorted(profiles)), default='default', show_default=True,
              help='Perfil de configuração')
@click.option('-v', '--verbose', is_flag=True, help='Log detalhado (DEBUG)')
@click.version_option(__version__)
@click.pass_context
def cli(ctx, config_path, profile, verbose):
    '''Plataforma de linguagem molecular'''
    configure_logging(verbose)
    ctx.obj = load_settings(profile, config_path)


# ============================================================================
# OPÇÕES COMPARTILHADAS
# ============================================================================

def seed_option(required=True):
    return click.option('--seed', type=click.IntRange(0, MAX_SEED), required=required,
                        help='Semente de 64 bits')


def out_option(help_text='Arquivo de saída'):
    return click.option('--out', 'out_path', required=True,
                        type=click.Path(dir_okay=False, path_type=Path), help=help_text)


def input_argument(name):
    return click.argument(name, type=click.Path(exists=True, dir_okay=False, path_type=Path))


def parse_int_list(ctx, param, value):
    if value is None:
        return None
    try:
        return tuple(int(part) for part in value.split(',') if part.strip())
    except ValueError:
        raise click.BadParameter(f'lista de inteiros separada por vírgulas esperada: {value!r}') from None


def parse_float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return tuple(float(part) for part in value.split(',') if part.strip())
    except ValueError:
        raise click.BadParameter(f'lista de números separada por vírgulas esperada: {value!r}') from None


def with_overrides(settings, **overrides):
    '''Cópia da configuração com as opções de linha de comando aplicadas'''
    merged = dict(settings)
    merged.update({key: value for key, value in overrides.items() if value is not None})
    return merged


def sibling(path, suffix):
    '''"<path><suffix>" no mesmo diretório'''
    return path.with_name(path.name + suffix)
