'''
Subcomandos da CLI, um módulo por área do pipeline
'''
