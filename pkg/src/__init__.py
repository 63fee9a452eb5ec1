# Rigged null hypersurface engine
