'''
Comando baseline (fingerprint + regressão logística)
'''

from pathlib import Path

import click

from app.baseline import BaselineHyper, format_metric, train_baseline
from app.commands.common import input_argument, out_option, seed_option, sibling, with_overrides
from app.datapipe.splitters import SplitIndices, scaffold_split
from app.datapipe.tasks import load_task_csv
from app.utils.artifacts import atomic_write_json, write_manifest


def task_split(settings, task_path, label_column, split_path, seed):
    '''Tarefa e divisão (arquivo --split ou divisão por scaffold)'''
    dataset, drops = load_task_csv(task_path, label_column)
    if split_path is not None:
        split = SplitIndices.from_json(Path(split_path).read_text(encoding='utf-8'))
        split.validate(len(dataset))
    else:
        split = scaffold_split(dataset, tuple(settings['SPLIT_FRACS']), seed)
    return dataset, drops, split


@click.command('baseline')
@input_argument('task_path')
@click.option('--label-column', required=True)
@click.option('--split', 'split_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='JSON de divisão (padrão: divisão por scaffold)')
@click.option('--radius', type=click.IntRange(min=0), default=None)
@click.option('--width', type=click.IntRange(min=1), default=None)
@click.option('--l2', type=click.FloatRange(min=0.0), default=None)
@seed_option(required=False)
@out_option('JSON do modelo linear')
@click.pass_obj
def baseline_command(settings, task_path, label_column, split_path, radius, width, l2, seed, out_path):
    '''Treinar o baseline de fingerprint e avaliar no teste'''
    settings = with_overrides(settings, FINGERPRINT_RADIUS=radius, FINGERPRINT_WIDTH=width, BASELINE_L2=l2)
    dataset, drops, split = task_split(settings, task_path, label_column, split_path, seed)
    model, report = train_baseline(
        dataset, split,
        radius=int(settings['FINGERPRINT_RADIUS']),
        width=int(settings['FINGERPRINT_WIDTH']),
        hyper=BaselineHyper.from_settings(settings),
    )
    model.save(out_path)
    report_path = sibling(out_path, '.report.json')
    atomic_write_json(report_path, {**report.to_dict(), 'task': dataset.task_name, 'dropped': drops.to_dict()})
    inputs = [task_path] + ([split_path] if split_path else [])
    write_manifest(out_path, 'baseline', seed, settings, inputs=inputs, outputs=[out_path, report_path])
    click.echo(f'ROC-AUC={format_metric(report.test_roc_auc)} PRC-AUC={format_metric(report.test_prc_auc)} -> {out_path}')


COMMANDS = (baseline_command,)
