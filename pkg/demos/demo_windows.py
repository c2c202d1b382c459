"""
Window models
=============

Fixed sliding, jumping and landmark windows, updated eagerly (every
arrival) or lazily (every few arrivals).
"""

from buildstream.streams import Window, WindowKind, WindowModel, window_update

models = {
    "eager sliding (5)": WindowModel(WindowKind.FIXED_SLIDING, 5),
    "lazy sliding (5, every 3)": WindowModel(WindowKind.FIXED_SLIDING, 5, update_interval=3),
    "jumping (3 of every 4)": WindowModel(WindowKind.JUMPING, 3, update_interval=4),
    "landmark": WindowModel(WindowKind.LANDMARK),
}

for name, model in models.items():
    w = Window()
    for t in range(1, 11):
        w = window_update(w, model, [t])
    print(f"{name:>26}: {w.elements}  pending {w.pending}")
