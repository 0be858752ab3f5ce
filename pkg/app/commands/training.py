'''
Comandos de treino: pretrain, finetune, scaling-report
'''

from pathlib import Path

import click

from app.commands.baseline import task_split
from app.commands.common import (
    input_argument,
    out_option,
    parse_int_list,
    seed_option,
    sibling,
    with_overrides,
)
from app.datapipe.corpus import read_corpus, subset
from app.datapipe.splitters import scaffold_split
from app.datapipe.tasks import load_task_csv
from app.tokenizers.encoding import Tokenizer
from app.training.finetune import finetune
from app.training.pretrain import pretrain
from app.training.run_config import TrainRunConfig
from app.training.scaling import scaling_experiment, summarize_scaling
from app.transformer.checkpoint import load_checkpoint, save_checkpoint
from app.transformer.model_config import ModelConfig
from app.utils.artifacts import atomic_write_bytes, atomic_write_json, atomic_write_text, write_manifest
from app.utils.reports import scaling_report_pdf

timing_option = click.option('--timing/--no-timing', default=False,
                             help='Incluir tempo de parede no registro (quebra a reprodutibilidade byte a byte)')


@click.command('pretrain')
@input_argument('corpus_path')
@click.option('--tokenizer', 'tokenizer_path', required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--resume', 'resume_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='Checkpoint (com estado do Adam) para continuar o treino')
@click.option('--epochs', type=click.IntRange(min=1), default=None)
@seed_option()
@timing_option
@out_option('Checkpoint da melhor época')
@click.pass_obj
def pretrain_command(settings, corpus_path, tokenizer_path, resume_path, epochs, seed, timing, out_path):
    '''Pré-treino MLM com mascaramento dinâmico'''
    settings = with_overrides(settings, PRETRAIN_EPOCHS=epochs)
    tokenizer = Tokenizer.load(tokenizer_path)
    model_config = ModelConfig.from_settings(settings, len(tokenizer.vocab))
    initial = load_checkpoint(resume_path, model_config) if resume_path else None
    result = pretrain(
        read_corpus(corpus_path),
        tokenizer,
        TrainRunConfig.from_settings(settings, 'pretrain', seed),
        model_config,
        initial=initial,
    )
    last_path = sibling(out_path, '.last')
    log_path = sibling(out_path, '.runlog.jsonl')
    save_checkpoint(result.checkpoint, out_path)
    save_checkpoint(result.last, last_path)
    atomic_write_text(log_path, result.log.to_jsonl(include_timing=timing))
    inputs = [corpus_path, tokenizer_path] + ([resume_path] if resume_path else [])
    write_manifest(out_path, 'pretrain', seed, settings, inputs=inputs, outputs=[out_path, last_path, log_path])
    click.echo(f'melhor época {result.log.best_epoch}, perda final '
               f'{result.log.summary["final_train_loss"]} -> {out_path}')


@click.command('finetune')
@input_argument('checkpoint_path')
@input_argument('task_path')
@click.option('--label-column', required=True)
@click.option('--split', 'split_path', type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help='JSON de divisão (padrão: divisão por scaffold)')
@click.option('--epochs', type=click.IntRange(min=1), default=None)
@click.option('--patience', type=click.IntRange(min=1), default=None)
@seed_option()
@timing_option
@out_option('Checkpoint ajustado (pesos da melhor época)')
@click.pass_obj
def finetune_command(settings, checkpoint_path, task_path, label_column, split_path, epochs, patience,
                     seed, timing, out_path):
    '''Ajuste fino com parada antecipada por ROC-AUC de validação'''
    settings = with_overrides(settings, FINETUNE_EPOCHS=epochs, PATIENCE=patience)
    checkpoint = load_checkpoint(checkpoint_path)
    dataset, drops, split = task_split(settings, task_path, label_column, split_path, seed)
    result = finetune(checkpoint, dataset, split, TrainRunConfig.from_settings(settings, 'finetune', seed))

    log_path = sibling(out_path, '.runlog.jsonl')
    metrics_path = sibling(out_path, '.metrics.json')
    save_checkpoint(result.checkpoint, out_path)
    atomic_write_text(log_path, result.log.to_jsonl(include_timing=timing))
    atomic_write_json(metrics_path, {
        'task': dataset.task_name,
        'best_epoch': result.log.best_epoch,
        'test_roc_auc': result.test_roc_auc,
        'test_prc_auc': result.test_prc_auc,
        'sizes': split.sizes(),
        'dropped': drops.to_dict(),
    })
    inputs = [checkpoint_path, task_path] + ([split_path] if split_path else [])
    write_manifest(out_path, 'finetune', seed, settings, inputs=inputs, outputs=[out_path, log_path, metrics_path])
    click.echo(f'melhor época {result.log.best_epoch}: ROC-AUC={result.test_roc_auc} '
               f'PRC-AUC={result.test_prc_auc} -> {out_path}')


def _parse_task(value):
    path, _, column = value.rpartition(':')
    if not path or not column:
        raise click.BadParameter(f'use CAMINHO:COLUNA (recebido {value!r})', param_hint='--task')
    if not Path(path).is_file():
        raise click.BadParameter(f'arquivo {path!r} não existe', param_hint='--task')
    return Path(path), column


@click.command('scaling-report')
@input_argument('corpus_path')
@click.option('--tokenizer', 'tokenizer_path', required=True,
              type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option('--task', 'task_options', multiple=True, required=True,
              help='CSV e coluna de rótulo no formato CAMINHO:COLUNA (repetível)')
@click.option('--sizes', callback=parse_int_list, default=None, help='Tamanhos dos subconjuntos aninhados')
@click.option('--workers', type=click.IntRange(min=1), default=None)
@click.option('--pdf', 'pdf_path', type=click.Path(dir_okay=False, path_type=Path), help='Relatório PDF opcional')
@seed_option()
@out_option('Relatório JSONL')
@click.pass_obj
def scaling_report_command(settings, corpus_path, tokenizer_path, task_options, sizes, workers, pdf_path,
                           seed, out_path):
    '''Escada de escala: pré-treino por subconjunto, ajuste fino e deltas entre tarefas'''
    settings = with_overrides(settings, SCALING_SUBSETS=sizes, WORKERS=workers)
    tasks_args = [_parse_task(option) for option in task_options]
    tokenizer = Tokenizer.load(tokenizer_path)
    subsets = subset(read_corpus(corpus_path), settings['SCALING_SUBSETS'])

    tasks = []
    for task_path, column in tasks_args:
        dataset, _ = load_task_csv(task_path, column, task_name=f'{task_path.stem}:{column}')
        tasks.append((dataset, scaffold_split(dataset, tuple(settings['SPLIT_FRACS']), seed)))

    report = scaling_experiment(
        subsets,
        tasks,
        tokenizer,
        ModelConfig.from_settings(settings, len(tokenizer.vocab)),
        TrainRunConfig.from_settings(settings, 'pretrain', seed),
        TrainRunConfig.from_settings(settings, 'finetune', seed),
        workers=int(settings['WORKERS']),
    )
    atomic_write_text(out_path, report.to_jsonl())
    outputs = [out_path]
    if pdf_path is not None:
        atomic_write_bytes(pdf_path, scaling_report_pdf(report))
        outputs.append(pdf_path)
    inputs = [corpus_path, tokenizer_path] + [path for path, _ in tasks_args]
    write_manifest(out_path, 'scaling-report', seed, settings, inputs=inputs, outputs=outputs)

    for size, bands in summarize_scaling(report).items():
        roc = bands['delta_roc_auc']
        text = '-' if roc is None else f'{roc.mean:+.4f} ± {roc.std:.4f}'
        click.echo(f'{size}: delta ROC-AUC {text}')


COMMANDS = (pretrain_command, finetune_command, scaling_report_command)
