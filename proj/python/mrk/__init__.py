"""In-process corruption and augmentation kernels on float32 arrays."""

from ._mrk import (
    __version__,
    afa_augment,
    apply_corruption,
    base_augment,
    cutmix,
    cutmix_batch,
    make_afa_pair,
    mixup,
    mixup_batch,
    transforms,
)

__all__ = [
    "__version__",
    "afa_augment",
    "apply_corruption",
    "base_augment",
    "cutmix",
    "cutmix_batch",
    "make_afa_pair",
    "mixup",
    "mixup_batch",
    "transforms",
]
