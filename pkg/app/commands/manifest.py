'''
Comando verify-manifest
'''

import click

from app.commands.common import input_argument
from app.errors import ManifestError
from app.utils.artifacts import verify_manifest


@click.command('verify-manifest')
@input_argument('manifest_path')
def verify_manifest_command(manifest_path):
    '''Recalcular os SHA-256 de entradas e saídas de um manifesto'''
    problems = verify_manifest(manifest_path)
    for path, reason in problems:
        click.echo(f'{path}: {reason}', err=True)
    if problems:
        raise ManifestError(f'{len(problems)} arquivo(s) divergente(s) em {manifest_path}')
    click.echo(f'OK: {manifest_path}')


COMMANDS = (verify_manifest_command,)
