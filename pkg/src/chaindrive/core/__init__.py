"""
chaindrive core

Scenario parsing, execution of comparison runs, and result output.
"""
