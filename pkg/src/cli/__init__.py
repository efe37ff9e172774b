"""Command line interface package.""" 