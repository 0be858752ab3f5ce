'''
Escrita atômica de artefatos e manifestos de execução

Todo artefato da CLI é escrito em arquivo temporário no mesmo diretório e
renomeado com os.replace. Ao lado dele fica "<saída>.manifest.json" com o
comando, a semente, a configuração e os SHA-256 de entradas e saídas.
Manifestos não têm carimbo de tempo: reexecuções idênticas geram bytes idênticos.
'''

import hashlib
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from app.errors import ManifestError

MANIFEST_SUFFIX = '.manifest.json'
_CHUNK = 1 << 20


# ============================================================================
# CONVERSÃO PARA JSON
# ============================================================================

def convert_to_native_types(obj):
    '''
    Converter tipos NumPy (e tuplas/Paths) para tipos nativos serializáveis

    Args:
        obj: objeto arbitrário

    Returns:
        objeto equivalente com int/float/bool/list/dict nativos
    '''
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [convert_to_native_types(item) for item in obj.tolist()]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, dict):
        return {str(key): convert_to_native_types(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [convert_to_native_types(item) for item in obj]
    return obj


def dumps_json(obj, indent=2):
    '''JSON determinístico (UTF-8, chaves na ordem de inserção, newline final)'''
    return json.dumps(convert_to_native_types(obj), ensure_ascii=False, indent=indent) + '\n'


# ============================================================================
# ESCRITA ATÔMICA
# ============================================================================

def atomic_write_bytes(path, data):
    path = Path(path)
    directory = path.parent if str(path.parent) else Path('.')
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode('utf-8'))


def atomic_write_json(path, obj):
    atomic_write_text(path, dumps_json(obj))


# ============================================================================
# MANIFESTOS
# ============================================================================

def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(_CHUNK), b''):
            digest.update(chunk)
    return digest.hexdigest()


def manifest_path(output_path):
    return Path(f'{output_path}{MANIFEST_SUFFIX}')


def build_manifest(command, seed, settings, inputs, outputs):
    return {
        'command': command,
        'seed': seed,
        'settings': convert_to_native_types(settings or {}),
        'inputs': {str(p): sha256_file(p) for p in inputs},
        'outputs': {str(p): sha256_file(p) for p in outputs},
    }


def write_manifest(output_path, command, seed=None, settings=None, inputs=(), outputs=None):
    '''
    Escrever "<output_path>.manifest.json"

    Args:
        output_path: artefato principal (nome base do manifesto)
        command: nome do subcomando
        seed: semente usada (ou None para comandos determinísticos)
        settings: configuração efetiva
        inputs: caminhos de entrada
        outputs: caminhos de saída (padrão: [output_path])

    Returns:
        caminho do manifesto
    '''
    outputs = [output_path] if outputs is None else list(outputs)
    target = manifest_path(output_path)
    atomic_write_json(target, build_manifest(command, seed, settings, inputs, outputs))
    return target


def verify_manifest(path):
    '''
    Recalcular os hashes de um manifesto

    Returns:
        lista de (caminho, motivo) divergentes; vazia se tudo confere

    Raises:
        ManifestError: manifesto ausente ou malformado
    '''
    try:
        doc = json.loads(Path(path).read_text(encoding='utf-8'))
        recorded = {**doc['inputs'], **doc['outputs']}
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise ManifestError(f'Manifesto inválido {path}: {e}') from e

    problems = []
    for file_path, expected in recorded.items():
        if not os.path.exists(file_path):
            problems.append((file_path, 'ausente'))
        elif sha256_file(file_path) != expected:
            problems.append((file_path, 'hash divergente'))
    return problems
