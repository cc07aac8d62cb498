# Cycle-factor blow-up toolkit
