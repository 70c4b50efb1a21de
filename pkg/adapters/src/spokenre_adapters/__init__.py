"""Thin adapters that move data between pretrained speech/text models and
the spokenre JSONL manifest format.  All coupling to the main toolkit goes
through that file format; no toolkit code is imported here."""

__version__ = "0.1.0"
