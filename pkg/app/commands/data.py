'''
Comandos de dados: curate, subset, split, to-selfies
'''

from pathlib import Path

import click

from app.chemistry.selfies import corpus_to_selfies
from app.commands.common import (
    input_argument,
    out_option,
    parse_float_list,
    parse_int_list,
    seed_option,
    sibling,
    with_overrides,
)
from app.datapipe.corpus import DEDUP_MODES, corpus_text, curate, read_corpus, read_lines, subset, write_corpus
from app.datapipe.splitters import scaffold_split, split_report
from app.datapipe.tasks import load_task_csv
from app.utils.artifacts import atomic_write_json, atomic_write_text, write_manifest


@click.command('curate')
@input_argument('input_path')
@out_option('Corpus curado (uma molécula por linha)')
@seed_option()
@click.option('--dedup', type=click.Choice(DEDUP_MODES), default=None,
              help='Deduplicação por string exata ou chave canônica')
@click.pass_obj
def curate_command(settings, input_path, out_path, seed, dedup):
    '''Aparar, deduplicar e embaralhar um corpus SMILES'''
    settings = with_overrides(settings, DEDUP_MODE=dedup)
    curated = curate(read_corpus(input_path), seed, settings['DEDUP_MODE'])
    write_corpus(curated, out_path)
    write_manifest(out_path, 'curate', seed, settings, inputs=[input_path])
    click.echo(f'{curated.count} linhas -> {out_path}')


@click.command('subset')
@input_argument('input_path')
@click.option('--sizes', required=True, callback=parse_int_list, help='Tamanhos crescentes, ex.: 2,5')
@click.option('--out-dir', required=True, type=click.Path(file_okay=False, path_type=Path))
@click.pass_obj
def subset_command(settings, input_path, sizes, out_dir):
    '''Prefixos aninhados de um corpus curado'''
    subsets = subset(read_corpus(input_path), sizes)
    paths = []
    for size, part in zip(sizes, subsets):
        path = out_dir / f'subset_{size}.txt'
        write_corpus(part, path)
        paths.append(path)
        click.echo(f'{size} linhas -> {path}')
    write_manifest(out_dir / 'subsets', 'subset', None, {'SIZES': list(sizes)},
                   inputs=[input_path], outputs=paths)


@click.command('split')
@input_argument('task_path')
@click.option('--label-column', required=True, help='Coluna do rótulo binário')
@click.option('--fracs', callback=parse_float_list, default=None, help='Frações treino,validação,teste')
@seed_option(required=False)
@out_option('JSON com os índices de cada partição')
@click.pass_obj
def split_command(settings, task_path, label_column, fracs, seed, out_path):
    '''Divisão por scaffold de Bemis-Murcko'''
    settings = with_overrides(settings, SPLIT_FRACS=fracs)
    dataset, drops = load_task_csv(task_path, label_column)
    split = scaffold_split(dataset, tuple(settings['SPLIT_FRACS']), seed)
    atomic_write_text(out_path, split.to_json())
    report_path = sibling(out_path, '.report.json')
    atomic_write_json(report_path, {'partitions': split_report(dataset, split), 'dropped': drops.to_dict()})
    write_manifest(out_path, 'split', seed, settings, inputs=[task_path], outputs=[out_path, report_path])
    sizes = split.sizes()
    click.echo(f'treino={sizes["train"]} validação={sizes["valid"]} teste={sizes["test"]} -> {out_path}')


@click.command('to-selfies')
@input_argument('input_path')
@out_option('Corpus SELFIES')
@click.pass_obj
def to_selfies_command(settings, input_path, out_path):
    '''Converter um corpus SMILES em SELFIES (linhas não convertidas são relatadas)'''
    converted, report = corpus_to_selfies(read_lines(input_path))
    atomic_write_text(out_path, corpus_text(str(s) for s in converted))
    skipped_path = sibling(out_path, '.skipped.json')
    atomic_write_json(skipped_path, report.to_dict())
    write_manifest(out_path, 'to-selfies', None, None, inputs=[input_path], outputs=[out_path, skipped_path])
    click.echo(f'{report.converted} convertidas, {report.n_skipped} ignoradas -> {out_path}')


COMMANDS = (curate_command, subset_command, split_command, to_selfies_command)
