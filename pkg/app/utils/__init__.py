'''
Utilitários: artefatos atômicos e manifestos, exportação de atenção, mapas de calor e relatórios
'''
