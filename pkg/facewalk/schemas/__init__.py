"""Pydantic models for the files read and written by the toolkit."""
