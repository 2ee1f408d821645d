/* Chain complexes of finitely generated free modules, graded maps, homology
 * (with presentations over Z), tensor products with Koszul signs, cones,
 * totalization of double complexes, sub/quotient complexes, and inverse
 * towers of graded modules with lim / lim^1 bookkeeping. */
#pragma once

#include "sparse.hpp"

#include <string>
#include <vector>

namespace ot {

struct ChainComplex {
    Ring ring;
    std::map<int, std::vector<std::string>> bas;  // degree -> basis labels
    std::map<int, Mat> d;                         // d[n] : C_n -> C_{n-1}

    int dim(int n) const {
        auto it = bas.find(n);
        return it == bas.end() ? 0 : (int)it->second.size();
    }
    int lowDegree() const { return bas.empty() ? 0 : bas.begin()->first; }
    int topDegree() const { return bas.empty() ? -1 : bas.rbegin()->first; }
    Mat dmat(int n) const {
        auto it = d.find(n);
        if (it != d.end()) return it->second;
        return Mat(dim(n - 1), dim(n));
    }
    void setDiff(int n, Mat m) {
        OT_CHECK(m.rows == dim(n - 1) && m.cols == dim(n), "internal", "differential shape mismatch");
        if (!m.isZero()) d[n] = std::move(m);
    }
    void validate() const;
    long totalDim() const {
        long t = 0;
        for (auto& [n, ls] : bas) { (void)n; t += (long)ls.size(); }
        return t;
    }
};

/* Degree-preserving graded linear map; by convention it has an entry (possibly
 * a zero matrix) for every degree where the source has positive dimension. */
using DegMap = std::map<int, Mat>;

Mat degAt(const DegMap& f, int n, int rows, int cols);
DegMap degIdentity(const ChainComplex& A);
DegMap degZero(const ChainComplex& A, const ChainComplex& B);
DegMap degCompose(const DegMap& f, const DegMap& g, const Ring& R);  // g after f (f first)
DegMap degAdd(const DegMap& f, const DegMap& g, const Ring& R);
DegMap degSub(const DegMap& f, const DegMap& g, const Ring& R);
bool degEqual(const DegMap& f, const DegMap& g);
bool degIsZero(const DegMap& f);
void checkChainMap(const ChainComplex& A, const ChainComplex& B, const DegMap& f);
bool isChainMap(const ChainComplex& A, const ChainComplex& B, const DegMap& f);

ChainComplex concentrated(const Ring& R, int degree, const std::vector<std::string>& labels);
ChainComplex zeroComplex(const Ring& R);
ChainComplex restrictToWindow(const ChainComplex& C, int lo, int hi);
ChainComplex directSum(const ChainComplex& A, const ChainComplex& B);

struct HomologyReport {
    Ring ring;
    std::map<int, long> freeRank;
    std::map<int, std::vector<mpz_class>> torsion;  // nonempty only over Z

    bool trivialAt(int n) const {
        auto f = freeRank.find(n);
        bool fr = (f == freeRank.end() || f->second == 0);
        auto t = torsion.find(n);
        return fr && (t == torsion.end() || t->second.empty());
    }
    bool operator==(const HomologyReport& o) const {
        return freeRank == o.freeRank && torsion == o.torsion;
    }
};

HomologyReport homology(const ChainComplex& C);
/* Largest n <= top with H_i = 0 for all i <= n; -1 when already H_min != 0. */
int connectivity(const HomologyReport& h, int top);

/* Presented homology over a field, with explicit cycle representatives so maps
 * of complexes can be pushed to maps of homology. */
struct HomologyBasis {
    Ring ring;
    std::map<int, Mat> kernel;     // columns: basis of cycles in C_n
    std::map<int, Echelon> bdry;   // echelon of boundary coords inside the kernel basis
    std::map<int, Mat> picked;     // C_n columns representing the chosen H-basis
    std::map<int, int> dim;

    int dimAt(int n) const {
        auto it = dim.find(n);
        return it == dim.end() ? 0 : it->second;
    }
    /* Coordinates of a cycle's class in the chosen basis; errors if v is not a cycle. */
    std::map<int, Q> classOf(int n, const std::map<int, Q>& v, const ChainComplex& C) const;
};
HomologyBasis homologyBasis(const ChainComplex& C);
/* Matrix of H_n(f) in the chosen bases. */
Mat inducedOnHomology(const HomologyBasis& HA, const HomologyBasis& HB,
                      const ChainComplex& A, const ChainComplex& B, const DegMap& f, int n);
/* Largest n <= top with H_i(f) iso for i < n and surjective at i = n (-1 if none). */
int mapConnectivity(const ChainComplex& A, const ChainComplex& B, const DegMap& f, int top);

/* Ordered tensor products with Koszul signs and block index bookkeeping. */
struct TensorIndex {
    struct Block {
        std::vector<int> deg;   // degree of each factor
        std::vector<int> dims;  // dimension of each factor in that degree
        long offset;
    };
    std::map<int, std::vector<Block>> blocks;           // total degree -> blocks in order
    std::map<int, std::map<std::vector<int>, int>> lut; // degree -> deg-composition -> block idx

    long indexOf(int n, const std::vector<int>& degs, const std::vector<int>& idxs) const;
    std::pair<std::vector<int>, std::vector<int>> at(int n, long pos) const;
};

struct TensorComplex {
    ChainComplex C;
    TensorIndex ix;
};
TensorComplex tensorMany(const std::vector<const ChainComplex*>& fac, int degLo, int degHi);
ChainComplex tensor(const ChainComplex& A, const ChainComplex& B);

/* Reorder tensor factors: dst position i is fed from src factor srcOf[i].
 * Koszul signs for the crossings are included. Both tensors must be built
 * over the same degree window. */
DegMap tensorFactorPermute(const TensorComplex& src, const TensorComplex& dst,
                           const std::vector<int>& srcOf, const Ring& R);

/* Apply g to the contiguous factor block [loFac, hiFac] of src, leaving the
 * other factors alone. g must be degree preserving, defined on gSrc (the
 * tensor of exactly those factors) with values in gTgt; dst is the tensor
 * with the block replaced by gTgt. No signs arise. */
DegMap applyOnFactors(const TensorComplex& src, int loFac, int hiFac, const DegMap& g,
                      const TensorComplex& gSrc, const ChainComplex& gTgt,
                      const TensorComplex& dst, const Ring& R);

ChainComplex cone(const ChainComplex& A, const ChainComplex& B, const DegMap& f);

struct DoubleComplex {
    Ring ring;
    std::map<std::pair<int, int>, std::vector<std::string>> bas;  // (p,q) -> labels
    std::map<std::pair<int, int>, Mat> dv;  // (p,q) -> (p,q-1)
    std::map<std::pair<int, int>, Mat> dh;  // (p,q) -> (p-1,q)
    int dimAt(int p, int q) const {
        auto it = bas.find({p, q});
        return it == bas.end() ? 0 : (int)it->second.size();
    }
};
/* Tot_n = sum over p+q = n, differential d = d^v + (-1)^q d^h. */
ChainComplex totalize(const DoubleComplex& D);

struct SubComplex {
    ChainComplex sub;
    DegMap incl;
};
SubComplex subcomplexFromSpan(const ChainComplex& C, const DegMap& span);

struct QuotientData {
    ChainComplex quot;
    DegMap proj;
    DegMap sect;     // right inverse of proj on chosen representatives
    bool monomial;   // projection columns all have at most one entry
};
QuotientData quotientComplex(const ChainComplex& C, const DegMap& relations);

struct GradedTower {
    Ring ring;
    std::vector<std::map<int, int>> stageDim;  // stage s (s = 0.. ), degree -> rank
    std::vector<DegMap> down;                  // down[s] : stage s+1 -> stage s
};
struct LimResult {
    bool conclusive = false;
    bool lim1Zero = false;  // certified via levelwise surjectivity (Mittag-Leffler)
    std::map<int, int> limRank;
    std::map<int, int> stabilizationIndex;
    std::string note;
};
LimResult limAndLim1(const GradedTower& T);

}  // namespace ot
