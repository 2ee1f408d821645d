/* Shared helpers for the test suite. The rank and homology oracles here are
 * deliberately naive dense computations, independent of the sparse echelon
 * code under test. */
#pragma once

#include "optower/chain.hpp"

#include <random>
#include <vector>

namespace otu {

using ot::ChainComplex;
using ot::Mat;
using ot::Q;
using ot::Ring;

inline std::vector<std::vector<Q>> toDense(const Mat& m) {
    std::vector<std::vector<Q>> d(m.rows, std::vector<Q>(m.cols, Q(0)));
    for (int j = 0; j < m.cols; j++)
        for (auto& [r, v] : m.c[j]) d[r][j] = v;
    return d;
}

/* Plain Gaussian elimination over the fraction field (entries reduced mod p
 * first for F_p); no pivot strategy shared with the library. */
inline long denseRank(const Mat& m, const Ring& R) {
    auto a = toDense(m);
    for (auto& row : a)
        for (auto& v : row) v = R.norm(v);
    int rows = m.rows, cols = m.cols;
    long rank = 0;
    int pr = 0;
    for (int j = 0; j < cols && pr < rows; j++) {
        int piv = -1;
        for (int i = pr; i < rows; i++)
            if (a[i][j] != 0) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(a[piv], a[pr]);
        for (int i = 0; i < rows; i++) {
            if (i == pr || a[i][j] == 0) continue;
            Q f = R.div(a[i][j], a[pr][j]);
            for (int k = j; k < cols; k++) a[i][k] = R.sub(a[i][k], R.mul(f, a[pr][k]));
        }
        pr++;
        rank++;
    }
    return rank;
}

inline Mat mkMat(int rows, int cols, const std::vector<std::vector<int>>& entries, const Ring& R) {
    Mat m(rows, cols);
    for (int i = 0; i < rows; i++)
        for (int j = 0; j < cols; j++)
            if (entries[i][j] != 0) m.set(i, j, R.norm(Q(entries[i][j])));
    return m;
}

inline ChainComplex mkComplex(const Ring& R, int lowDeg, const std::vector<int>& dims,
                              const std::vector<Mat>& diffs) {
    ChainComplex C;
    C.ring = R;
    for (int i = 0; i < (int)dims.size(); i++) {
        if (dims[i] == 0) continue;
        std::vector<std::string> ls;
        for (int j = 0; j < dims[i]; j++)
            ls.push_back("e" + std::to_string(lowDeg + i) + "." + std::to_string(j));
        C.bas[lowDeg + i] = ls;
    }
    for (int i = 0; i < (int)diffs.size(); i++) C.setDiff(lowDeg + i + 1, diffs[i]);
    C.validate();
    return C;
}

/* Random complex with guaranteed d^2 = 0: conjugate a complex with zero
 * differential plus a few "staircase" identity blocks by random unit
 * upper-triangular base changes. Cheap and exercises nontrivial homology. */
inline ChainComplex randomComplex(std::mt19937& rng, const Ring& R, int lowDeg, int nDeg,
                                  int maxDim) {
    std::uniform_int_distribution<int> dimDist(0, maxDim);
    std::vector<int> dims(nDeg);
    for (auto& d : dims) d = dimDist(rng);
    std::vector<Mat> diffs;
    // staircase: d_i sends the first rankOf[i] basis vectors of degree i to the
    // last rankOf[i] of degree i-1; d^2 = 0 needs rankOf[i] + rankOf[i-1] <= dims[i-1]
    std::vector<int> rankOf(nDeg, 0);
    for (int i = 1; i < nDeg; i++) {
        int maxR = std::min(dims[i], dims[i - 1] - rankOf[i - 1]);
        std::uniform_int_distribution<int> rd(0, std::max(0, maxR));
        rankOf[i] = rd(rng);
    }
    for (int i = 1; i < nDeg; i++) {
        Mat d(dims[i - 1], dims[i]);
        for (int k = 0; k < rankOf[i]; k++) d.set(dims[i - 1] - 1 - k, k, Q(1));
        diffs.push_back(d);
    }
    ChainComplex C = mkComplex(R, lowDeg, dims, diffs);
    // conjugate each degree by a random unit upper-triangular matrix
    std::uniform_int_distribution<int> entry(-2, 2);
    std::map<int, Mat> base, baseInv;
    for (auto& [n, ls] : C.bas) {
        int m = (int)ls.size();
        Mat U = Mat::id(m), Ui = Mat::id(m);
        for (int j = 1; j < m; j++)
            for (int i = 0; i < j; i++) {
                int v = entry(rng);
                if (v) U.set(i, j, R.norm(Q(v)));
            }
        // invert unit upper-triangular by back substitution
        for (int j = m - 1; j >= 0; j--)
            for (int i = j - 1; i >= 0; i--) {
                Q s(0);
                for (int k = i + 1; k <= j; k++) s = R.add(s, R.mul(U.get(i, k), Ui.get(k, j)));
                if (s != 0) Ui.set(i, j, R.neg(s));
            }
        base[n] = U;
        baseInv[n] = Ui;
    }
    for (auto& [n, d] : C.d)
        d = baseInv.at(n - 1).mul(d.mul(base.at(n), R), R);
    C.validate();
    return C;
}

inline std::map<int, long> freeRanksOf(const ot::HomologyReport& h) { return h.freeRank; }

/* Independent homology dimensions over a field via the dense rank oracle. */
inline std::map<int, long> denseHomologyDims(const ChainComplex& C) {
    std::map<int, long> out;
    for (auto& [n, ls] : C.bas) {
        if (ls.empty()) continue;
        long r = (long)ls.size() - denseRank(C.dmat(n), C.ring) - denseRank(C.dmat(n + 1), C.ring);
        if (r > 0) out[n] = r;
    }
    return out;
}

}  // namespace otu
