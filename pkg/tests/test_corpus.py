from collections import Counter

import numpy as np
import pytest

from jetad.corpus import CorpusConfig, generate, worked_example


def test_deterministic():
    a = [i.text for i in generate(CorpusConfig(size=20, seed=3))]
    b = [i.text for i in generate(CorpusConfig(size=20, seed=3))]
    assert a == b


def test_bounds(corpus):
    for inst in corpus:
        assert 2 <= inst.dim <= 8
        assert 1 <= inst.depth <= 6
        assert all(0.2 <= xi <= 2.0 for xi in inst.x)
        assert inst.tape.size <= 200


def test_every_primitive_appears(corpus):
    kinds = Counter(n.primitive for inst in corpus for n in inst.tape.nodes)
    for name in ("add", "sub", "neg", "mul", "div", "pow", "sin", "cos", "tan",
                 "exp", "log", "sqrt", "tanh", "const"):
        assert kinds[name] > 0, name


def test_fan_out_occurs(corpus):
    shared = 0
    for inst in corpus:
        uses = Counter(i for n in inst.tape.nodes for i in n.inputs)
        shared += any(c > 1 and s >= inst.dim for s, c in uses.items())
    assert shared > 0


def test_config_validation():
    with pytest.raises(ValueError):
        CorpusConfig(min_dim=3, max_dim=2)
    with pytest.raises(ValueError):
        CorpusConfig(low=0.0)


def test_worked_example():
    inst = worked_example()
    assert inst.tape.size == 6 and np.array_equal(inst.point, [1.0, 2.0, 3.0])
