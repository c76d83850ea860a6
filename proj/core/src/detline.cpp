#include "cmt/detline.hpp"

namespace cmt {

Complex wedge_coord(const std::vector<CVector>& vectors, const CMatrix& ref_basis,
                    double rank_tol) {
    const Index n = ref_basis.cols();
    if (ref_basis.rows() != n) {
        throw ShapeError("wedge_coord: reference basis must be square");
    }
    if (static_cast<Index>(vectors.size()) != n) {
        throw ShapeError("wedge_coord: need exactly dim-many vectors");
    }
    for (const CVector& v : vectors) {
        if (v.size() != n) throw ShapeError("wedge_coord: vector dimension mismatch");
    }
    if (n == 0) return Complex(1, 0);
    CMatrix m(n, n);
    for (Index j = 0; j < n; ++j) m.col(j) = vectors[static_cast<size_t>(j)];
    // Coordinates of the vectors in the reference basis, then one determinant.
    const CMatrix coords = solve(ref_basis, m, rank_tol);
    return det(coords);
}

int fusion_sign(Index dim_v, Index dim_w) {
    return ((dim_v * dim_w) % 2 == 0) ? +1 : -1;
}

int graded_fusion_sign(Index dim_c_odd, Index dim_ct_even) {
    return ((dim_c_odd * dim_ct_even) % 2 == 0) ? +1 : -1;
}

DetElement multi_fusion(const std::vector<DetElement>& elements) {
    DetElement out;
    out.coord = Complex(1, 0);
    out.power = +1;
    std::string id;
    for (const DetElement& e : elements) {
        if (e.power != +1) {
            throw ContractError("multi_fusion: all factors must have power +1");
        }
        out.space_dim += e.space_dim;
        out.coord *= e.coord;
        if (!id.empty()) id += "+";
        id += e.ref_basis_id;
    }
    out.ref_basis_id = id;
    return out;
}

Complex dual_pair(const DetElement& dual_elem, const DetElement& elem) {
    if (dual_elem.power != -1 || elem.power != +1) {
        throw ContractError("dual_pair: expected a Det(V)^{-1} and a Det(V) element");
    }
    if (dual_elem.space_dim != elem.space_dim) {
        throw ShapeError("dual_pair: dimension mismatch");
    }
    return dual_elem.coord * elem.coord;
}

}  // namespace cmt
