"""Feature visualization and adversarial examples.

Both applications optimize over the input of a network: feature visualization
looks for the input in the box that maximizes one unit's activation, and an
adversarial example is the input closest (in L1 distance) to a reference that
the network assigns to a chosen wrong class by a margin.

"""

import logging

import numpy as np

from .engine import conf, lp
from .engine.util import as_vector
from .encode import encode_network, set_objective, solve
from .network import classify

__all__ = ('target_label', 'AdversarialSpec', 'VerificationReport',
           'build_featviz_model', 'build_adversarial_model',
           'verify_adversarial', 'render_perturbation', 'input_values',
           'solve_featviz', 'solve_adversarial')

log = logging.getLogger(__name__)


def target_label (true_label, num_classes):
    """The label an adversarial example for ``true_label`` should get.

For 10 classes this is ``(true_label + 5) mod 10``; in general the label half
way round, ``(true_label + num_classes // 2) mod num_classes``.

"""
    if num_classes < 2:
        raise ValueError('need at least 2 classes')
    if not 0 <= true_label < num_classes:
        raise ValueError('label {0} out of range for {1} classes'
                         .format(true_label, num_classes))
    return (true_label + num_classes // 2) % num_classes


class AdversarialSpec (object):
    """What an adversarial example must achieve.

AdversarialSpec(reference, true_label, target=None, margin=conf.MARGIN,
                pixel_cap=conf.PIXEL_CAP, max_changed=None)

:arg reference: the input to perturb.
:arg true_label: its correct label.
:arg target: the label to reach; defaults to :func:`target_label` once the
             number of classes is known.
:arg margin: the target's output must be at least this factor times every
             other output.
:arg pixel_cap: largest allowed change of any one input, or ``None``.
:arg max_changed: largest number of inputs that may change, or ``None``.

"""

    def __init__ (self, reference, true_label, target=None, margin=None,
                  pixel_cap=None, max_changed=None):
        self.reference = as_vector(reference, name='reference input')
        self.true_label = int(true_label)
        self.target = None if target is None else int(target)
        self.margin = conf.MARGIN if margin is None else float(margin)
        if pixel_cap is None:
            pixel_cap = conf.PIXEL_CAP
        self.pixel_cap = None if pixel_cap is None else float(pixel_cap)
        self.max_changed = None if max_changed is None else int(max_changed)

    def target_for (self, num_classes):
        if self.target is None:
            return target_label(self.true_label, num_classes)
        return self.target

    def check (self, net):
        """Raise ``ValueError`` unless this spec suits ``net``."""
        n = net.layers[-1].n_out
        if len(self.reference) != net.input_dim:
            raise ValueError('reference input has length {0}, expected {1}'
                             .format(len(self.reference), net.input_dim))
        if not 0 <= self.true_label < n:
            raise ValueError('true label {0} out of range for {1} outputs'
                             .format(self.true_label, n))
        target = self.target_for(n)
        if not 0 <= target < n:
            raise ValueError('target label {0} out of range for {1} outputs'
                             .format(target, n))
        if target == self.true_label:
            raise ValueError('target label equals the true label')
        if not self.margin >= 1:
            raise ValueError('margin factor must be at least 1')
        if self.pixel_cap is not None and not self.pixel_cap > 0:
            raise ValueError('pixel cap must be positive')
        if self.max_changed is not None and self.max_changed < 0:
            raise ValueError('maximum number of changed inputs must be '
                             'nonnegative')
        tol = 1e-9
        if (np.any(self.reference < net.input_lower - tol) or
            np.any(self.reference > net.input_upper + tol)):
            raise ValueError('reference input is outside the input box')

    def as_dict (self, net=None):
        d = {'true_label': self.true_label, 'margin': self.margin,
             'pixel_cap': self.pixel_cap, 'max_changed': self.max_changed}
        d['target'] = (self.target if net is None
                       else self.target_for(net.layers[-1].n_out))
        return d


def build_featviz_model (net, bounds, unit):
    """Model maximizing the value of ``unit = (k, j)`` over the input box."""
    k, j = unit
    if k < 1 or not net.has_unit(k, j):
        raise ValueError('unit ({0}, {1}) does not exist'.format(k, j))
    model = set_objective(encode_network(net, bounds), {(k, j): 1.},
                          sense=lp.sense.MAXIMIZE)
    model.extras['unit'] = (k, j)
    return model


def build_adversarial_model (net, bounds, spec):
    """Model of the L1-closest input to ``spec.reference`` classified as the
target by the required margin.

build_adversarial_model(net, bounds, spec) -> model

Adds a distance variable ``d[j] >= |x[0,j] - reference[j]|`` per input (at most
``spec.pixel_cap``), one margin row ``x[K,target] >= margin x[K,i]`` per other
output ``i``, and minimizes ``sum d``.  With ``spec.max_changed``, each input
also gets a binary ``c[j]``, with ``d[j] <= D[j] c[j]`` and
``sum c <= max_changed``.

Raises ``ValueError`` if the spec doesn't suit the network.

"""
    spec.check(net)
    model = encode_network(net, bounds)
    prog = model.lp
    idx = model.var_index
    K = net.n_layers
    n_out = net.layers[-1].n_out
    target = spec.target_for(n_out)
    ref = spec.reference
    distance = []
    changed = []
    for j in range(net.input_dim):
        x = idx[(0, j, 'x')]
        reach = max(net.input_upper[j] - ref[j], ref[j] - net.input_lower[j],
                    0.)
        if spec.pixel_cap is None:
            ub = reach
        else:
            ub = spec.pixel_cap
            reach = min(reach, ub)
        d = prog.add_var('d[{0}]'.format(j), 0., ub)
        idx[(0, j, 'd')] = d
        prog.add_row({x: 1., d: -1.}, upper=ref[j], name='distlo[{0}]'.format(j))
        prog.add_row({x: 1., d: 1.}, lower=ref[j], name='disthi[{0}]'.format(j))
        distance.append((d, x, float(ref[j])))
        if spec.max_changed is not None:
            c = model.add_binary('c[{0}]'.format(j))
            idx[(0, j, 'c')] = c
            prog.add_row({d: 1., c: -reach}, upper=0.,
                         name='changed[{0}]'.format(j))
            changed.append((c, d))
    if changed:
        prog.add_row(dict((c, 1.) for c, d in changed), upper=spec.max_changed,
                     name='maxchanged')
    t = idx[(K, target, 'x')]
    for i in range(n_out):
        if i != target:
            prog.add_row({t: 1., idx[(K, i, 'x')]: -spec.margin}, lower=0.,
                         name='margin[{0}]'.format(i))
    prog.set_objective(dict((d, 1.) for d, x, r in distance),
                       lp.sense.MINIMIZE)
    model.extras.update(distance=distance, changed=changed, spec=spec,
                        target=target)
    log.debug('adversarial model: true label %d, target %d', spec.true_label,
              target)
    return model


class VerificationReport (object):
    """The result of :func:`verify_adversarial`."""

    def __init__ (self, label, scores, target, margin_ok, in_box, l1, linf,
                  cap_ok, n_changed, changed_ok):
        self.label = label
        self.scores = scores
        self.target = target
        self.margin_ok = margin_ok
        self.in_box = in_box
        self.l1 = l1
        self.linf = linf
        #: ``None`` without a pixel cap.
        self.cap_ok = cap_ok
        self.n_changed = n_changed
        #: ``None`` without a limit on changed inputs.
        self.changed_ok = changed_ok

    @property
    def passed (self):
        return (self.margin_ok and self.in_box and self.cap_ok is not False
                and self.changed_ok is not False)

    def as_dict (self):
        return {'label': self.label, 'scores': self.scores.tolist(),
                'target': self.target, 'margin_ok': self.margin_ok,
                'in_box': self.in_box, 'l1': self.l1, 'linf': self.linf,
                'cap_ok': self.cap_ok, 'n_changed': self.n_changed,
                'changed_ok': self.changed_ok, 'passed': self.passed}


def verify_adversarial (net, x0, spec, tol=None):
    """Check an adversarial example independently of the model.

verify_adversarial(net, x0, spec[, tol]) -> report

:arg tol: tolerance on the margin and on counting changed inputs; defaults to
          :data:`conf.VERIFY_TOL`.

:return: :class:`VerificationReport`.

"""
    if tol is None:
        tol = conf.VERIFY_TOL
    x0 = as_vector(x0, net.input_dim, 'input')
    label, scores = classify(net, x0)
    target = spec.target_for(len(scores))
    others = np.delete(scores, target)
    margin_ok = bool(np.all(scores[target] >= spec.margin * others - tol))
    in_box = bool(np.all(x0 >= net.input_lower - 1e-9) and
                  np.all(x0 <= net.input_upper + 1e-9))
    delta = np.abs(x0 - spec.reference)
    linf = float(delta.max())
    cap_ok = None
    if spec.pixel_cap is not None:
        cap_ok = linf <= spec.pixel_cap + 1e-9
    n_changed = int(np.sum(delta > tol))
    changed_ok = None
    if spec.max_changed is not None:
        changed_ok = n_changed <= spec.max_changed
    return VerificationReport(label, scores, target, margin_ok, in_box,
                              float(delta.sum()), linf, cap_ok, n_changed,
                              changed_ok)


def render_perturbation (x0, reference):
    """Return ``(delta, image)``: the absolute input changes, and image values
showing them dark on white (``1 - delta``, clamped to ``[0, 1]``)."""
    x0 = as_vector(x0, name='input')
    reference = as_vector(reference, len(x0), 'reference input')
    delta = np.abs(x0 - reference)
    return (delta, np.clip(1 - delta, 0., 1.))


def input_values (model, x):
    """The input part of a solution of a network model."""
    n = model.net.input_dim
    return np.array([x[model.var_index[(0, j, 'x')]] for j in range(n)])


def solve_featviz (net, bounds, unit, config=None):
    """Build and solve a feature visualization model.

solve_featviz(net, bounds, unit[, config]) -> (result, x0)

``x0`` is the optimal input, or ``None`` if no solution was found.

"""
    model = build_featviz_model(net, bounds, unit)
    result = solve(model, config)
    x0 = input_values(model, result.x) if result.x is not None else None
    return (result, x0)


def solve_adversarial (net, bounds, spec, config=None):
    """Build and solve an adversarial model.

solve_adversarial(net, bounds, spec[, config]) -> (result, x0)

"""
    model = build_adversarial_model(net, bounds, spec)
    result = solve(model, config)
    x0 = input_values(model, result.x) if result.x is not None else None
    if x0 is not None:
        # solver tolerances may leave x0 a hair outside the box
        x0 = np.clip(x0, net.input_lower, net.input_upper)
    return (result, x0)
