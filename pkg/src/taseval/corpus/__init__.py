"""Corpus ingestion, synthesis, batch evaluation and correlation."""
