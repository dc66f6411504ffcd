"""Denoise rotated glyphs: CCDNN against a deep CCA baseline.

View 1 holds clean rotated 8x8 glyphs and view 2 noisy copies. Both models
share the same encoder and decoder shapes. CCDNN trains everything end to
end through the CCA constraint and the filter. The baseline first trains
the encoders for maximal correlation, then fits decoders on the frozen
features.
"""

import argparse

from ccguide import TrainConfig, build_ccdnn, evaluate, gen_noisy_patterns, train
from ccguide.model import train_dcca_reconstruction


def model(seed, **kw):
    return build_ccdnn("reconstruct", (64, 64), latent=(8, 8), enc_hidden=(64,),
                       head_hidden=(64,), seed=seed, recon_activation="sigmoid", **kw)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=10)
    p.add_argument("--epochs", type=int, default=10)
    args = p.parse_args()

    d = gen_noisy_patterns(2000, 8, seed=args.seed)
    cfg = TrainConfig(epochs=args.epochs, batch_size=256, learning_rate=1e-3,
                      seed=args.seed, momentum=0.9)

    ccdnn = model(args.seed)
    rep = train(ccdnn, d, cfg, callback=lambda e: print(
        f"  epoch {e['epoch']:2d}  loss {e['loss']:.3f}  total corr {e['total_correlation']:.3f}"))
    dcca = model(args.seed, constrained=False)
    train_dcca_reconstruction(dcca, d, cfg)

    test = d.test()
    a, b = evaluate(ccdnn, test), evaluate(dcca, test)
    print(f"\nCCDNN  test MSE {a['mse']:.3f}  MAE {a['mae']:.3f}  ({len(rep.epochs)} epochs)")
    print(f"DCCA   test MSE {b['mse']:.3f}  MAE {b['mae']:.3f}")
    print("MSE is summed over both 64-pixel views and averaged over samples.")


if __name__ == "__main__":
    main()
