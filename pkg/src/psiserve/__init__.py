"""Machine-learning entities as web resources: relations, attributes,
transformers, learners, and predictors behind a uniform JSON protocol,
with an embedded schema language."""

__version__ = "0.1.0"
