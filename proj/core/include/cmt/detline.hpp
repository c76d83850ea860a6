#pragma once

#include <string>
#include <vector>

#include "cmt/numkit.hpp"

namespace cmt {

/// An element of Det(V) or Det(V)^{-1}, carried as a scalar coordinate
/// against a declared reference basis of V.  Det of a zero-dimensional
/// space is the ground field with canonical generator 1.
struct DetElement {
    Index space_dim = 0;
    std::string ref_basis_id;
    Complex coord{0, 0};
    int power = +1;  // +1 for Det(V), -1 for Det(V)^{-1}
};

/// Coordinate of v_1 ^ ... ^ v_n against the wedge of the reference basis:
/// det of the change-of-basis matrix expressing the vectors in that basis.
Complex wedge_coord(const std::vector<CVector>& vectors, const CMatrix& ref_basis,
                    double rank_tol = 1e-9);

/// Swap sign of the fusion isomorphism: (-1)^(dim V * dim W).
int fusion_sign(Index dim_v, Index dim_w);

/// Swap sign of the Z2-graded fusion: (-1)^(dim C^odd * dim C~^even).
int graded_fusion_sign(Index dim_c_odd, Index dim_ct_even);

/// Fuses Det(V_1) x ... x Det(V_r) -> Det(V_1 + ... + V_r) in concatenation
/// order: coordinates multiply.  All factors must have power +1.
DetElement multi_fusion(const std::vector<DetElement>& elements);

/// Pairing of Det(V)^{-1} with Det(V): coordinates multiply.
Complex dual_pair(const DetElement& dual_elem, const DetElement& elem);

}  // namespace cmt
