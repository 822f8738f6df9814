"""From photon and emitter linewidths to a calibrated extinction dip."""
from photonprobe.pipeline import LaserReference, SourceModel, reconstruct

# Source photons carry 18 MHz of spectral jitter on top of their 20 MHz width.
src = SourceModel(20.0, 18.0)
rec = reconstruct(src)
print(f"uncalibrated dip: depth {100 * rec.uncalibrated.fit().extras['depth']:.1f} %, "
      f"FWHM {rec.uncalibrated.fit()['fwhm']:.2f} MHz")

# The laser reference converts that into the depth a real detector would see.
print(f"calibrated dip:   depth {100 * rec.amplitude:.3f} %, FWHM {rec.fwhm:.3f} MHz")
plain = reconstruct(src, drift_correction=False)
print(f"without the drift correction: depth {100 * plain.amplitude:.3f} %")

# A sharper reference laser line changes only the calibration factor.
alt = reconstruct(src, ref=LaserReference(0.093, 20.0, 1.0))
print(f"with a unit drift factor: depth {100 * alt.amplitude:.3f} %")
