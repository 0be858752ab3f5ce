'''
Comando attention-export
'''

from pathlib import Path

import click

from app.commands.common import input_argument, out_option, with_overrides
from app.transformer.checkpoint import load_checkpoint
from app.utils.artifacts import atomic_write_json, write_manifest
from app.utils.attention_export import export_attention
from app.utils.heatmap import HEATMAP_FORMATS, write_heatmaps


@click.command('attention-export')
@input_argument('checkpoint_path')
@click.argument('molecule')
@click.option('--layer', 'layers', type=click.IntRange(min=0), multiple=True, help='Camadas (repetível; padrão: todas)')
@click.option('--head', 'heads', type=click.IntRange(min=0), multiple=True, help='Cabeças (repetível; padrão: todas)')
@click.option('--heatmaps', 'heatmap_dir', type=click.Path(file_okay=False, path_type=Path),
              help='Diretório para um mapa de calor por matriz')
@click.option('--format', 'fmt', type=click.Choice(HEATMAP_FORMATS), default=None)
@out_option('JSON de exportação da atenção')
@click.pass_obj
def attention_export_command(settings, checkpoint_path, molecule, layers, heads, heatmap_dir, fmt, out_path):
    '''Exportar as matrizes de atenção de uma molécula (e mapas de calor opcionais)'''
    settings = with_overrides(settings, HEATMAP_FORMAT=fmt)
    document = export_attention(load_checkpoint(checkpoint_path), molecule, layers, heads)
    atomic_write_json(out_path, document)
    outputs = [out_path]
    if heatmap_dir is not None:
        outputs.extend(write_heatmaps(document, heatmap_dir, settings['HEATMAP_FORMAT']))
    write_manifest(out_path, 'attention-export', None, {'MOLECULE': molecule, 'LAYERS': list(layers),
                                                        'HEADS': list(heads)},
                   inputs=[checkpoint_path], outputs=outputs)
    click.echo(f'{len(document["attention"])} matrizes, {len(document["tokens"])} tokens -> {out_path}')


COMMANDS = (attention_export_command,)
