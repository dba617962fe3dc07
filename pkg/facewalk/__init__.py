"""Face routing on planarized unit-disk graphs."""
