"""Two-action learning automata teams and the two feedback schedules.

Every literal of every clause component owns a two-action automaton with
2N states. States 0..N-1 select Include, states N..2N-1 select Exclude.
A reward deepens the current action (moves away from the N boundary) and a
penalty moves toward it, possibly across. Fresh automata start at state N,
the weakest Exclude, so new clauses are empty and match everything.

Feedback on a sample whose label matches the clause's voting target
("type one") is stochastic in the specificity s. Feedback on a mismatched
label ("type two") is deterministic and only ever pushes excluded literals
that read 0 toward inclusion, which is what builds reasoning-by-elimination
patterns.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

INCLUDE = True
EXCLUDE = False


class TaTeam:
    """State tensor for all clause components across layers.

    states[layer] has shape (num_clauses, width) where the width is twice
    the layer's hypervector half (original plus negated bits).
    """

    def __init__(
        self,
        num_clauses: int,
        layer_widths: list[int],
        states_per_action: int = 128,
    ):
        if num_clauses <= 0:
            raise ConfigError("need at least one clause")
        if not layer_widths:
            raise ConfigError("need at least one layer")
        if states_per_action <= 0:
            raise ConfigError("states_per_action must be positive")
        self.num_clauses = num_clauses
        self.states_per_action = states_per_action
        self.states: list[np.ndarray] = [
            np.full((num_clauses, w), states_per_action, dtype=np.int32)
            for w in layer_widths
        ]
        # float32 include masks are cached for the hot matmul path; rows are
        # refreshed after feedback touches them.
        self._mask_cache: list[np.ndarray | None] = [None] * len(layer_widths)

    @property
    def num_layers(self) -> int:
        return len(self.states)

    def layer_width(self, layer: int) -> int:
        return self.states[layer].shape[1]

    def include_mask(self, layer: int) -> np.ndarray:
        """Boolean (num_clauses, width): literal is included."""
        return self.states[layer] < self.states_per_action

    def include_mask_f32(self, layer: int) -> np.ndarray:
        cached = self._mask_cache[layer]
        if cached is None:
            cached = self.include_mask(layer).astype(np.float32)
            self._mask_cache[layer] = cached
        return cached

    def invalidate_cache(self) -> None:
        """Drop cached masks after states were overwritten wholesale."""
        self._mask_cache = [None] * len(self.states)

    def _refresh_row(self, layer: int, clause: int) -> None:
        cached = self._mask_cache[layer]
        if cached is not None:
            cached[clause] = (
                self.states[layer][clause] < self.states_per_action
            ).astype(np.float32)

    def action(self, clause: int, layer: int, literal: int) -> bool:
        """INCLUDE (True) iff the automaton sits in the include half."""
        return bool(self.states[layer][clause, literal] < self.states_per_action)

    def included_count(self, clause: int) -> int:
        return int(
            sum(int(np.count_nonzero(st[clause] < self.states_per_action))
                for st in self.states)
        )

    def set_included(self, clause: int, layer: int, literals) -> None:
        """Hand-set a component: listed literals to deepest include.

        Everything else in the component is reset to the weakest exclude, so
        the call fully determines the component.
        """
        row = self.states[layer][clause]
        row[:] = self.states_per_action
        for k in literals:
            row[int(k)] = 0
        self._refresh_row(layer, clause)


def type_i_feedback(
    team: TaTeam,
    clause: int,
    layer: int,
    literal_values: np.ndarray,
    clause_value: bool,
    s: float,
    rng: np.random.Generator,
    allow_include: bool = True,
) -> None:
    """Apply the matched-label schedule to one clause component.

    Args:
        literal_values: bool row, the layer's hypervector at the chosen node.
        clause_value: the whole clause's output on this graph.
        s: specificity, >= 1. At s=1 nothing ever moves toward include here;
           inclusion is then driven purely by type II elimination.
        rng: the clause's own stream (one uniform per literal is consumed).
        allow_include: False suppresses moves toward the include half, which
           enforces the max-included-literals cap.
    """
    if s < 1:
        raise ConfigError(f"specificity must be >= 1, got {s}")
    st = team.states[layer][clause]
    n = team.states_per_action
    inc = st < n
    u = rng.random(st.shape[0])
    p_strong = (s - 1.0) / s
    p_weak = 1.0 / s
    if clause_value:
        lv = literal_values
        hit = u < p_strong
        down = inc & lv & hit  # reward: deepen include
        toward = ~inc & lv & hit  # penalty: walk toward include
        if allow_include:
            down = down | toward
        up = ~inc & ~lv & (u < p_weak)  # reward: deepen exclude
        st -= down
        st += up
    else:
        # Both actions move the same way when the clause is quiet: include
        # gets penalized, exclude gets rewarded, each with probability 1/s.
        st += u < p_weak
    np.clip(st, 0, 2 * n - 1, out=st)
    team._refresh_row(layer, clause)


def type_ii_feedback(
    team: TaTeam,
    clause: int,
    layer: int,
    literal_values: np.ndarray,
    clause_value: bool,
) -> None:
    """Apply the mismatched-label schedule: deterministic elimination.

    Only excluded literals reading 0 on a firing clause move (one step toward
    include); every other cell is inaction.
    """
    if not clause_value:
        return
    st = team.states[layer][clause]
    n = team.states_per_action
    st -= (st >= n) & ~literal_values
    team._refresh_row(layer, clause)


def action(team: TaTeam, clause: int, layer: int, literal: int) -> bool:
    """Functional alias for TaTeam.action."""
    return team.action(clause, layer, literal)


class ClauseWeights:
    """Signed per-clause, per-class integer weights, no clamping."""

    def __init__(self, num_clauses: int, num_classes: int):
        if num_classes <= 0:
            raise ConfigError("need at least one class")
        self.values = np.zeros((num_clauses, num_classes), dtype=np.int32)

    def votes(self, clause_outputs: np.ndarray) -> np.ndarray:
        """Per-class sums of the weights of firing clauses."""
        return self.values.T @ clause_outputs.astype(np.int32)

    def reinforce(self, clause: int, cls: int, delta: int) -> None:
        self.values[clause, cls] += delta
