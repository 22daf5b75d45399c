"""Desk-scale generative choreography over 53-vertex motion capture.

Three model families share one numpy-backed autodiff core: an LSTM stack
with a mixture-density head for conditional sequence prediction, a pose
autoencoder for latent-space drawing and projection, and a sequence VAE
for unconditional sampling and tunable variations.
"""

__version__ = "0.1.0"
