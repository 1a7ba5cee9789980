"""Siamese cropped masked autoencoder pre-training, desk scale.

Subpackages:
    numerics  - tensors, reverse-mode autodiff, deterministic RNG streams
    views     - image io, augmentations, view-pair construction, synthetic data
    model     - patching, masking, encoder/decoder network, attention tooling
    optim     - AdamW with decoupled decay, warmup + cosine schedule
    trainer   - pre-training loop, checkpoints, metrics log
    propeval  - label-propagation evaluation and segmentation/pose metrics
    cli       - command-line entry point
"""

__version__ = "0.1.0"
