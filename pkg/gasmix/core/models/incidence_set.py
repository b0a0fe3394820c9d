from dataclasses import dataclass
import numpy as np


@dataclass
class IncidenceSet:
    """
    A class used to hold the weighted and signed incidence matrices of a refined graph.

    Edge k running from node i to node j has M[k, j] = +regulator ratio and
    M[k, i] = -compressor ratio, so (M p)_k is the outlet-minus-inlet pressure
    difference seen inside the pipe. Columns are split into slack (s) and
    non-slack (d) blocks; the positive part of the non-slack block marks edge
    outlets and the negative part marks edge inlets. Signed matrices are the
    entrywise sign of the weighted ones. Diagonal matrices are stored as vectors.

    Attributes
    ----------
    M : np.ndarray
        E x V weighted incidence matrix.
    M_s, M_d : np.ndarray
        Slack and non-slack column blocks of M.
    M_d_pos, M_d_neg : np.ndarray
        Positive and negative parts of M_d, so M_d = M_d_pos + M_d_neg.
    Q_d, Q_d_pos, Q_d_neg, Q_s, Q_s_neg : np.ndarray
        Signed counterparts of M_d, M_d_pos, M_d_neg, M_s and the negative part of M_s.
    areas : np.ndarray
        Per-edge cross-sectional areas (diagonal of X), m^2.
    lengths : np.ndarray
        Per-edge lengths (diagonal of L), m.
    r : np.ndarray
        Per-non-slack-node volumes sum over incoming edges of area * length * regulator ratio (diagonal of R), m^3.
    friction_coefficients : np.ndarray
        Per-edge sqrt(2 D / (lambda l)) (diagonal of Lambda).
    """
    M: np.ndarray
    M_s: np.ndarray
    M_d: np.ndarray
    M_d_pos: np.ndarray
    M_d_neg: np.ndarray
    Q_d: np.ndarray
    Q_d_pos: np.ndarray
    Q_d_neg: np.ndarray
    Q_s: np.ndarray
    Q_s_neg: np.ndarray
    areas: np.ndarray
    lengths: np.ndarray
    r: np.ndarray
    friction_coefficients: np.ndarray

    @property
    def X(self) -> np.ndarray:
        return np.diag(self.areas)

    @property
    def L(self) -> np.ndarray:
        return np.diag(self.lengths)

    @property
    def R(self) -> np.ndarray:
        return np.diag(self.r)

    @property
    def Lambda(self) -> np.ndarray:
        return np.diag(self.friction_coefficients)
