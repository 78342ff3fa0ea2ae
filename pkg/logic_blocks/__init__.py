# logic blocks package: lattices, codebooks, channel, detectors, analysis
