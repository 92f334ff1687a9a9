"""Run configuration for nullgeo"""
