"""Inference: generate the three fixture models, run the CNN forward pass on
one preprocessed window, and show the tree-ensemble head reusing the CNN
embedding for the hcm model.

Run: python demos/03_inference.py
"""

import tempfile
from datetime import datetime, timezone
from pathlib import Path

from ecgflow.adapters import parse_kardia_record
from ecgflow.core import DeviceKind, StudyId
from ecgflow.models.cnn import cnn_forward, pooled_length_chain
from ecgflow.models.fixtures import write_default_registry
from ecgflow.models.registry import ModelRegistry, predict_all
from ecgflow.models.trees import ensemble_forward
from ecgflow.preprocess import preprocess
from ecgflow.simulators import SyntheticEcgSpec, render_json_record

t0 = datetime(2026, 3, 4, 10, 0, tzinfo=timezone.utc)
payload = render_json_record(
    DeviceKind.KARDIA, SyntheticEcgSpec(seed=99).for_device(DeviceKind.KARDIA), t0
)
rec = parse_kardia_record(payload, study_id=StudyId("ef" * 8), received_at=t0)
window = preprocess(rec)

with tempfile.TemporaryDirectory() as tmp:
    descriptors, registry_path = write_default_registry(Path(tmp))
    print(f"registry: {registry_path.name} with {len(descriptors)} models")
    registry = ModelRegistry.from_descriptors(descriptors)

    chain = pooled_length_chain(5000, 7)
    print(f"shape chain after each conv block's pool: 5000 -> {' -> '.join(map(str, chain))}")

    hcm = registry.loaded["hcm"]
    prob_cnn_head, embedding = cnn_forward(hcm.cnn, window)
    prob_ensemble = ensemble_forward(hcm.ensemble, embedding)
    print(f"hcm: cnn-head prob {prob_cnn_head:.6f}; "
          f"embedding dim {embedding.shape[0]}; "
          f"ensemble({len(hcm.ensemble.trees)} trees) prob {prob_ensemble:.6f}")

    print("\nall models on the same window:")
    for out in predict_all(window, registry):
        label = out.probability >= out.threshold
        print(f"  {out.model_id:11s} p={out.probability:.6f} "
              f"threshold={out.threshold} label={'positive' if label else 'negative'}")

    again = predict_all(window, registry)
    assert [o.probability for o in again] == [o.probability for o in predict_all(window, registry)]
    print("\nforward passes are deterministic (bitwise-identical probabilities)")
