"""Sentiment-seeded adversarial stock forecasting pipeline.

A Naive Bayes sentiment classifier over financial text produces a
standardized 100-dimensional latent seed that drives an LSTM-generator /
CNN-discriminator adversarial model trained on engineered numerical
features, evaluated against classical and neural baselines over multi-day
forecast horizons.
"""

__version__ = "0.1.0"
