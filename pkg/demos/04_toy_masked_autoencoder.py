"""The desk-scale masked autoencoder: masking contract, gradients, overfit.

Visible patches pass through the affine encoder; masked positions are
replaced by a learned mask token before decoding; the MSE against the
pre-distortion target covers every patch. This script checks the gradient
against finite differences and overfits one tiny batch.

Run from the repository root:

    python3 demos/04_toy_masked_autoencoder.py
"""

import numpy as np

from reverbforge.mae import (
    MaskedBatch,
    forward,
    init_model,
    loss_and_grads,
    patchify,
    train,
    unpatchify,
)

rng = np.random.default_rng(11)

print("== patch tiling ==")
grid = rng.normal(size=(16, 8))
patches = patchify(grid, patch_h=4, patch_w=4)
print(f"16x8 grid -> {patches.n_patches} patches of dim {patches.patch_dim}")
print("unpatchify inverts exactly:", np.array_equal(unpatchify(patches), grid))

print("\n== masking contract ==")
inp = patchify(rng.normal(size=(24, 4)), 4, 4)
tgt = patchify(rng.normal(size=(24, 4)), 4, 4)
# One masked patch: all masked positions share the single mask token, so a
# batch with several differently-targeted masked patches has a loss floor.
visible = np.array([True, True, False, True, True, True])
batch = MaskedBatch(inp, tgt, visible)
model = init_model(inp.patch_dim, 8, rng)
loss_a = forward(model, batch)[1]
batch.input_patches.patches[~visible] = 1e9  # garbage in the masked patches
loss_b = forward(model, batch)[1]
print(f"loss with/without masked-patch garbage: {loss_a:.6f} / {loss_b:.6f} "
      f"(bit-identical: {loss_a == loss_b})")

print("\n== gradient vs central finite differences (mask token included) ==")
_, analytic = loss_and_grads(model, batch)
worst = 0.0
for name, p in model.params().items():
    flat = p.ravel()
    idx = rng.integers(flat.size)  # spot-check one coordinate per block
    h = 1e-5
    orig = flat[idx]
    flat[idx] = orig + h
    up = loss_and_grads(model, batch)[0]
    flat[idx] = orig - h
    down = loss_and_grads(model, batch)[0]
    flat[idx] = orig
    numeric = (up - down) / (2 * h)
    a = analytic[name].ravel()[idx]
    rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-12)
    worst = max(worst, rel)
    print(f"  {name:12s} d/dtheta[{idx:3d}]: analytic {a:+.6e}, numeric {numeric:+.6e}")
print(f"worst relative error: {worst:.2e}")

print("\n== overfitting one fixed batch with plain gradient descent ==")
losses = train(model, batch, steps=500, lr=0.2)
final = forward(model, batch)[1]
for step in (0, 50, 100, 250, 499):
    print(f"  step {step:3d}: loss {losses[step]:.6f}")
print(f"  final: {final:.8f} ({final / losses[0]:.2e} of initial)")
