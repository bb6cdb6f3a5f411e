from __future__ import annotations

import pickle

from triplecorpus.errors import CorpusFormatError, PipelineError, RedirectCycleError


def test_errors_cross_process_boundaries() -> None:
    cause = CorpusFormatError("token-out-of-range", "token 9 is missing", 12)
    error = pickle.loads(pickle.dumps(PipelineError("spate", "article 1 sentence 2 extraction 0", cause)))

    assert error.stage == "spate"
    assert error.cause.reason == "token-out-of-range"
    assert error.cause.line_number == 12
    assert str(error) == "stage 'spate' failed on article 1 sentence 2 extraction 0: line 12: token 9 is missing " \
                         "[token-out-of-range]"

    cycle = pickle.loads(pickle.dumps(RedirectCycleError("A", ["A", "B", "A"])))
    assert cycle.chain == ["A", "B", "A"]
