#!/usr/bin/env python3
"""Independent oracle for bilinear sampling of a linear ramp.

Models the sampling convention used by the library: source pixel (r, c)
is a sample at continuous coordinates (r + 0.5, c + 0.5), output pixel
centers are mapped affinely onto the requested region, and coordinates
within the outer half-pixel border replicate the edge sample. For a
horizontal ramp the closed form is piecewise linear in x.
"""


def ramp_value(x, width, slope, base):
    """Continuous bilinear reconstruction of src[r][c] = base + slope*c."""
    u = x - 0.5
    if u < 0.0:
        u = 0.0
    if u > width - 1:
        u = float(width - 1)
    return base + slope * u


def sampled_ramp(region_left, region_width, out_size, src_width, slope, base):
    out = []
    for j in range(out_size):
        x = region_left + (j + 0.5) * region_width / out_size
        out.append(ramp_value(x, src_width, slope, base))
    return out


def main():
    # the footprint-upsampling case: region [0, 102.4) out 512 on a 512-wide ramp
    vals = sampled_ramp(0.0, 102.4, 512, 512, 1.0 / 513.0, 1.0 / 513.0)
    print("footprint ramp, first 4:", ["%.12g" % v for v in vals[:4]])
    print("footprint ramp, last 2 :", ["%.12g" % v for v in vals[-2:]])
    # interior slope between consecutive interior samples = 0.2/513
    interior = vals[3] - vals[2]
    print("interior step: %.17g (expect %.17g)" % (interior, 0.2 / 513.0))

    # generic interior region on a 64-wide ramp
    vals = sampled_ramp(10.25, 31.5, 48, 64, 0.01, 0.05)
    print("interior ramp, first 3:", ["%.17g" % v for v in vals[:3]])


if __name__ == "__main__":
    main()
