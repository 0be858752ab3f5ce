'''
Mapas de calor estáticos (SVG ou PDF) das matrizes de atenção via reportlab.graphics
'''

import logging

import numpy as np
from reportlab import rl_config
from reportlab.graphics import renderPDF, renderSVG
from reportlab.graphics.shapes import Drawing, Group, Rect, String
from reportlab.lib import colors

from app.utils.artifacts import atomic_write_bytes

logger = logging.getLogger(__name__)

HEATMAP_FORMATS = ('svg', 'pdf')
CELL = 18
MARGIN = 70
FONT = 'Helvetica'
FONT_SIZE = 7
LOW = colors.white
HIGH = colors.HexColor('#003366')

# PDFs sem data de criação nem identificador aleatório
rl_config.invariant = 1


def cell_color(value, vmax):
    '''Interpolação linear branco -> azul escuro'''
    fraction = 0.0 if vmax <= 0 else float(np.clip(value / vmax, 0.0, 1.0))
    return colors.linearlyInterpolatedColor(LOW, HIGH, 0.0, 1.0, fraction)


def heatmap_drawing(matrix, tokens, title=''):
    '''
    Desenho com uma célula por entrada (linhas = consulta, colunas = chave)
    e rótulos de token nos dois eixos
    '''
    matrix = np.asarray(matrix, dtype=np.float64)
    n = matrix.shape[0]
    side = n * CELL
    width = side + 2 * MARGIN
    height = side + 2 * MARGIN
    drawing = Drawing(width, height)
    vmax = float(matrix.max()) if matrix.size else 0.0

    top = MARGIN + side
    for row in range(n):
        for col in range(n):
            drawing.add(Rect(
                MARGIN + col * CELL, top - (row + 1) * CELL, CELL, CELL,
                fillColor=cell_color(matrix[row, col], vmax),
                strokeColor=colors.lightgrey, strokeWidth=0.25,
            ))

    for index, token in enumerate(tokens[:n]):
        # eixo das consultas (esquerda)
        drawing.add(String(
            MARGIN - 4, top - (index + 1) * CELL + CELL / 3, token,
            fontName=FONT, fontSize=FONT_SIZE, textAnchor='end',
        ))
        # eixo das chaves (acima, rotacionado)
        label = Group(String(0, 0, token, fontName=FONT, fontSize=FONT_SIZE))
        label.translate(MARGIN + index * CELL + 2 * CELL / 3, top + 4)
        label.rotate(90)
        drawing.add(label)

    if title:
        drawing.add(String(width / 2, height - 14, title, fontName='Helvetica-Bold',
                           fontSize=10, textAnchor='middle'))
    return drawing


def render_heatmap(matrix, tokens, title='', fmt='svg'):
    '''Bytes do mapa de calor no formato pedido'''
    if fmt not in HEATMAP_FORMATS:
        raise ValueError(f'Formato de mapa de calor inválido {fmt!r} (use {HEATMAP_FORMATS})')
    drawing = heatmap_drawing(matrix, tokens, title)
    if fmt == 'svg':
        return renderSVG.drawToString(drawing).encode('utf-8')
    return renderPDF.drawToString(drawing)


def write_heatmaps(document, directory, fmt='svg'):
    '''
    Um arquivo por matriz do documento de exportação

    Returns:
        caminhos escritos, na ordem das matrizes
    '''
    paths = []
    for entry in document['attention']:
        path = directory / f'layer{entry["layer"]}_head{entry["head"]}.{fmt}'
        title = f'camada {entry["layer"]}, cabeça {entry["head"]}'
        atomic_write_bytes(path, render_heatmap(entry['matrix'], document['tokens'], title, fmt))
        paths.append(path)
    logger.info('[ATENÇÃO] %d mapas de calor em %s', len(paths), directory)
    return paths
