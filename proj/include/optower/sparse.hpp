/* Sparse exact matrices (column-major, no stored zeros) and the elimination
 * kernels everything else rides on: rank / kernel / image / solve over a
 * field, column echelon with pivot bookkeeping for quotients, Smith normal
 * form with transforms over Z, cokernel presentations. */
#pragma once

#include "ring.hpp"

#include <map>
#include <optional>
#include <vector>

namespace ot {

struct Mat {
    int rows = 0, cols = 0;
    std::vector<std::map<int, Q>> c;  // c[j] : row -> nonzero value

    Mat() = default;
    Mat(int r, int k) : rows(r), cols(k), c(k) {}

    static Mat id(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m.c[i][i] = 1;
        return m;
    }

    Q get(int i, int j) const {
        auto it = c[j].find(i);
        return it == c[j].end() ? Q(0) : it->second;
    }
    void set(int i, int j, const Q& v) {
        OT_CHECK(i >= 0 && i < rows && j >= 0 && j < cols, "internal", "matrix index out of range");
        if (v == 0) c[j].erase(i); else c[j][i] = v;
    }
    void add(int i, int j, const Q& v, const Ring& R) {
        if (v == 0) return;
        Q w = R.add(get(i, j), v);
        set(i, j, w);
    }
    long nnz() const {
        long n = 0;
        for (auto& col : c) n += (long)col.size();
        return n;
    }
    bool isZero() const { return nnz() == 0; }

    Mat mul(const Mat& B, const Ring& R) const;        // this * B
    Mat add(const Mat& B, const Ring& R) const;
    Mat sub(const Mat& B, const Ring& R) const;
    Mat scaled(const Q& s, const Ring& R) const;
    Mat transpose() const;
    Mat hcat(const Mat& B) const;                      // [this | B]
    Mat vcat(const Mat& B) const;                      // [this ; B]
    std::map<int, Q> apply(const std::map<int, Q>& v, const Ring& R) const;  // this * v
    bool operator==(const Mat& o) const;
};

/* Column echelon form: columns reduced so each nonzero column has a distinct
 * pivot row not appearing in later pivots; pivot choice follows the Markowitz
 * count (nnz(row)-1)*(nnz(col)-1), ties by lowest (row, col). */
struct Echelon {
    Mat basis;                  // echelonized nonzero columns (span of input)
    std::vector<int> pivotRow;  // pivot row of basis column j
    Mat transform;              // input * transform = [basis | 0] column arrangement
    std::vector<int> zeroCols;  // transform columns spanning the kernel
    bool unitPivots = true;     // all pivots units (always true over a field)
};

Echelon columnEchelon(const Mat& m, const Ring& R, bool wantTransform = false);

int rankField(const Mat& m, const Ring& R);
Mat kernelField(const Mat& m, const Ring& R);   // columns = kernel basis
Mat imageField(const Mat& m, const Ring& R);    // columns = image basis
/* Solve m * X = B over a field; nullopt if some column of B is outside the image. */
std::optional<Mat> solveField(const Mat& m, const Mat& B, const Ring& R);

/* Reduce v against echelon columns (eliminating pivot rows). */
std::map<int, Q> reduceModulo(const Echelon& e, std::map<int, Q> v, const Ring& R);

struct SNFResult {
    Mat U, D, V;                          // U * M * V = D, U and V unimodular
    std::vector<mpz_class> invariantFactors() const;  // nonzero diagonal, d_i | d_{i+1}
};
SNFResult smithNormalForm(const Mat& m, const Ring& R);  // ring must be Z

Mat kernelZ(const Mat& m);                       // basis of the (saturated) kernel lattice
std::optional<Mat> solveZ(const Mat& m, const Mat& B);  // integral solution of m*X = B

struct CokerPres {
    long freeRank = 0;
    std::vector<mpz_class> torsion;  // invariant factors > 1
};
CokerPres cokernelPresentation(const Mat& m, const Ring& R);

/* Field-only rank guard used by the exact-algebra entry points. */
int rankOp(const Mat& m, const Ring& R);

}  // namespace ot
