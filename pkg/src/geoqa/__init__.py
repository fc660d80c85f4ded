"""geoqa: reproducible geospatial QA-dataset authoring toolkit."""

__version__ = "0.1.0"
