# Copyright 2026 The idsample Authors. All Rights Reserved.
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
# ==============================================================================
"""Iterative deepening sampling orchestrator (C++ core)."""

from idsample._core import (
    DEFAULT_TRIGGER_TEXT,
    BackendError,
    ComparisonError,
    DatasetError,
    ScoringRequired,
    UnparseableAnswer,
    answer_kind,
    best_of_n,
    canonical,
    compare,
    equivalent,
    equivalent_n,
    extract_final_answer,
    id_sample_scripted,
    k_grid,
    load_dataset,
    majority_vote,
    overhead_bound,
    pad_trigger,
    plan_rounds,
    round_budget,
    rounds_to_exhaust,
    run,
)

__all__ = [
    "DEFAULT_TRIGGER_TEXT",
    "BackendError",
    "ComparisonError",
    "DatasetError",
    "ScoringRequired",
    "UnparseableAnswer",
    "answer_kind",
    "best_of_n",
    "canonical",
    "compare",
    "equivalent",
    "equivalent_n",
    "extract_final_answer",
    "id_sample_scripted",
    "k_grid",
    "load_dataset",
    "majority_vote",
    "overhead_bound",
    "pad_trigger",
    "plan_rounds",
    "round_budget",
    "rounds_to_exhaust",
    "run",
]
