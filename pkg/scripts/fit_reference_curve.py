#!/usr/bin/env python3
"""Refit the reference REV->ABS quadratic from its own sampled curve.

Samples Y = 0.0036 X^2 - 0.5373 X + 21.714 at X = 0, 5, ..., 45, fits the
calibration model (h = 1) and prints the recovered coefficients next to the
originals, plus the curve at a few query distances.
"""
from monodist.calib import REFERENCE_COEFFS, CalibrationSample, apply, fit_quadratic


def main():
    c0, c1, c2 = REFERENCE_COEFFS
    xs = range(0, 50, 5)
    samples = [CalibrationSample(x=x, y_abs=c0 + c1 * x + c2 * x * x) for x in xs]
    model = fit_quadratic(samples, h=1.0)

    print(f"{'':>10} {'reference':>12} {'fitted':>16} {'abs diff':>12}")
    for name, ref, got in (
        ("c0", c0, model.c0),
        ("c1", c1, model.c1),
        ("c2", c2, model.c2),
    ):
        print(f"{name:>10} {ref:>12.6g} {got:>16.12g} {abs(got - ref):>12.3g}")
    print(f"fit rmse: {model.fit_rmse:.3g} m over {model.n_samples} samples")
    print()
    for x in (0, 10, 25, 45):
        print(f"apply(rev={x:>2} m) -> abs {apply(model, x):8.3f} m")


if __name__ == "__main__":
    main()
