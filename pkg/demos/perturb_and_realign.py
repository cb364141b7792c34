"""Walk a small image through every perturbation and undo it again.

The rule the whole scoring pipeline leans on: apply followed by the inverse
returns the original array bit for bit, so realigned predictions share one
canonical orientation and disagreement is attributable to the model alone.
"""

import numpy as np

from pcdal import (KINDS, Perturbation, apply, image_roles, inverse,
                   prediction_roles, realign)


def main():
    img = np.arange(9, dtype=np.float64).reshape(3, 3)
    roles = image_roles(2)
    print("original:")
    print(img, "\n")

    for kind in KINDS:
        p = Perturbation(kind)
        fwd = apply(p, img, roles)
        back = apply(inverse(p), fwd, roles)
        exact = back.tobytes() == img.tobytes()
        print(f"{kind:<8} inverse={inverse(p).name:<8} round-trip exact: {exact}")
        if kind == "rot90":
            print(fwd)

    # chains invert in reverse order
    chain = Perturbation("rot90+flip_v")
    print(f"\nchain {chain.name!r} inverts as {inverse(chain).name!r}")
    fwd = apply(chain, img, roles)
    assert np.array_equal(apply(inverse(chain), fwd, roles), img)

    # a prediction tensor keeps its class axis fixed while the plane moves
    probs = np.stack([img / img.sum(), 1 - img / img.sum()])
    p = Perturbation("flip_h")
    moved = apply(p, probs, prediction_roles("segmentation-2d"))
    restored = realign(p, moved, prediction_roles("segmentation-2d"))
    print("prediction realigned exactly:",
          restored.tobytes() == probs.tobytes())


if __name__ == "__main__":
    main()
