'''
Relatório PDF do experimento de escala (reportlab platypus)
'''

import io

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import inch
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from app.training.scaling import BAND_DEFINITION, summarize_scaling

PRIMARY = colors.HexColor('#003366')

TABLE_STYLE = TableStyle([
    ('BACKGROUND', (0, 0), (-1, 0), PRIMARY),
    ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
    ('ALIGN', (0, 0), (-1, -1), 'CENTER'),
    ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
    ('FONTSIZE', (0, 0), (-1, 0), 10),
    ('BOTTOMPADDING', (0, 0), (-1, 0), 8),
    ('GRID', (0, 0), (-1, -1), 0.5, colors.black),
    ('FONTSIZE', (0, 1), (-1, -1), 9),
    ('ROWBACKGROUNDS', (0, 1), (-1, -1), [colors.white, colors.HexColor('#f0f0f0')]),
])


def _fmt(value, signed=False):
    if value is None:
        return '-'
    return f'{value:+.4f}' if signed else f'{value:.4f}'


def scaling_report_pdf(report):
    '''
    Gerar o PDF do relatório de escala

    Returns:
        bytes do PDF (sem data de criação: mesma entrada, mesmos bytes)
    '''
    buffer = io.BytesIO()
    doc = SimpleDocTemplate(
        buffer,
        pagesize=A4,
        rightMargin=0.8 * inch,
        leftMargin=0.8 * inch,
        topMargin=1 * inch,
        bottomMargin=1 * inch,
        title='Experimento de escala do pré-treino',
        invariant=1,
    )

    styles = getSampleStyleSheet()
    title_style = ParagraphStyle(
        'CustomTitle',
        parent=styles['Heading1'],
        fontSize=20,
        textColor=PRIMARY,
        spaceAfter=6,
        alignment=TA_CENTER,
        fontName='Helvetica-Bold',
    )
    heading_style = ParagraphStyle(
        'CustomHeading2',
        parent=styles['Heading2'],
        fontSize=13,
        textColor=PRIMARY,
        spaceBefore=12,
        spaceAfter=6,
        fontName='Helvetica-Bold',
    )

    story = [
        Paragraph('EXPERIMENTO DE ESCALA DO PRÉ-TREINO', title_style),
        Spacer(1, 0.2 * inch),
        Paragraph(
            f'<b>Semente:</b> {report.seed}<br/>'
            f'<b>Subconjuntos:</b> {", ".join(str(s) for s in report.subset_sizes)}<br/>'
            f'<b>Tarefas:</b> {", ".join(report.tasks)}<br/>'
            f'<b>Faixa:</b> {BAND_DEFINITION}<br/>'
            f'<b>Referência em escala completa (contexto):</b> '
            f'Delta ROC-AUC={report.reference["roc_auc"]:+.3f}, Delta PRC-AUC={report.reference["prc_auc"]:+.3f}',
            styles['BodyText'],
        ),
        Paragraph('RESULTADOS POR TAREFA', heading_style),
    ]

    rows = [['Subconjunto', 'Tarefa', 'ROC-AUC', 'PRC-AUC', 'Delta ROC-AUC', 'Delta PRC-AUC']]
    for row in report.rows:
        rows.append([
            str(row.subset_size), row.task,
            _fmt(row.test_roc_auc), _fmt(row.test_prc_auc),
            _fmt(row.delta_roc_auc, signed=True), _fmt(row.delta_prc_auc, signed=True),
        ])
    table = Table(rows, repeatRows=1)
    table.setStyle(TABLE_STYLE)
    story.append(table)

    story.append(Paragraph('FAIXA ENTRE TAREFAS', heading_style))
    band_rows = [['Subconjunto', 'Delta ROC-AUC (média ± dp)', 'Delta PRC-AUC (média ± dp)', 'Tarefas']]
    for size, bands in summarize_scaling(report).items():
        roc, prc = bands['delta_roc_auc'], bands['delta_prc_auc']
        band_rows.append([
            str(size),
            '-' if roc is None else f'{roc.mean:+.4f} ± {roc.std:.4f}',
            '-' if prc is None else f'{prc.mean:+.4f} ± {prc.std:.4f}',
            '-' if roc is None else str(roc.n),
        ])
    band_table = Table(band_rows, repeatRows=1)
    band_table.setStyle(TABLE_STYLE)
    story.append(band_table)

    doc.build(story)
    return buffer.getvalue()
