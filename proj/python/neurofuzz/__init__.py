# Copyright 2026 The Neurofuzz Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Neural file-format fuzzing toolkit."""

from ._neurofuzz import (
    Error,
    Model,
    Vocabulary,
    derive_seed,
    incremental_update,
    parameter_count,
    parse_host,
    parse_strict,
    pass_rate,
    perplexity,
    synth_corpus,
    synth_host,
    trailing_object,
)

__all__ = [
    "Error",
    "Model",
    "Vocabulary",
    "derive_seed",
    "incremental_update",
    "parameter_count",
    "parse_host",
    "parse_strict",
    "pass_rate",
    "perplexity",
    "synth_corpus",
    "synth_host",
    "trailing_object",
]
