"""Domain services: geometry, rate analysis, placement, beamforming and the trial harness."""
