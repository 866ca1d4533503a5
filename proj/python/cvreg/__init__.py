# Copyright 2026 The cvreg Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Pseudo-label selection, cross-task and cross-view regularization, fusion
and panoptic quality, on numpy arrays.

Catalogs, configs and weights are plain dicts; configs may be partial and
missing keys keep their defaults.
"""

import json

from . import _cvreg
from ._cvreg import IoError, ValidationError, PANOPTIC_LABEL_DIVISOR

__all__ = [
    "IoError",
    "ValidationError",
    "PANOPTIC_LABEL_DIVISOR",
    "default_catalog",
    "default_config",
    "argmax_label",
    "semantic_entropy",
    "fit_weights",
    "pseudo_labels",
    "match_histograms",
    "fuse",
    "evaluate",
    "run_experiment",
    "read_container",
    "write_container",
    "cli",
]

VARIANTS = ("single_task", "inter_task", "inter_style", "cross_view")


def _cfg(config):
    return "" if config is None else json.dumps(config)


def default_catalog():
    return json.loads(_cvreg.default_catalog())


def default_config():
    return json.loads(_cvreg.default_config())


def argmax_label(probs):
    return _cvreg.argmax_label(probs)


def semantic_entropy(probs):
    return _cvreg.semantic_entropy(probs)


def fit_weights(probs, instances, catalog, config=None):
    """Class-balanced weights over lists of probability maps and instance lists."""
    return json.loads(
        _cvreg.fit_weights(list(probs), list(instances), json.dumps(catalog), _cfg(config)))


def pseudo_labels(variant, probs, instances, weights, catalog, config=None,
                  probs_other=None, instances_other=None):
    """Returns (semantic labels, instance list) for one of VARIANTS.

    The two-view variants also need the restyled view's predictions.
    """
    return _cvreg.pseudo_labels(variant, probs, instances, json.dumps(weights),
                                json.dumps(catalog), _cfg(config), probs_other,
                                instances_other)


def match_histograms(src, ref):
    return _cvreg.match_histograms(src, ref)


def fuse(instances, labels, catalog, config=None):
    return _cvreg.fuse(instances, labels, json.dumps(catalog), _cfg(config))


def evaluate(pairs, catalog):
    """PQ report over (pred, gt) pairs of encoded panoptic maps."""
    return json.loads(_cvreg.evaluate(list(pairs), json.dumps(catalog)))


def run_experiment(config=None, jobs=1):
    return json.loads(_cvreg.run_experiment(_cfg(config), jobs))


def read_container(path):
    return _cvreg.read_container(str(path))


def write_container(path, container):
    _cvreg.write_container(str(path), container)


def cli(*args):
    """Runs the command-line tool in-process; returns (code, stdout, stderr)."""
    return _cvreg.cli([str(a) for a in args])
