/* Symmetric sequences of chain complexes: levelwise complexes with right
 * symmetric group actions given on adjacent transpositions, tensor products
 * and powers of sequences, coinvariants against a left action, and the
 * composition (circle) product.
 *
 * Convention: permutation words multiply left to right, (sigma*tau)(i) =
 * tau(sigma(i)), and all actions here are right actions, so the matrix of a
 * word is the product of the generator matrices taken in word order with each
 * new generator multiplying on the left. */
#pragma once

#include "chain.hpp"

namespace ot {

struct SymSeq {
    Ring ring;
    int Rmax = 0;
    std::vector<ChainComplex> lev;           // lev[r], r = 0..Rmax
    std::vector<std::vector<DegMap>> act;    // act[r][i]: right action of s_{i+1} on lev[r]

    int dim(int r, int n) const {
        return (r < 0 || r > Rmax) ? 0 : lev[r].dim(n);
    }
    long levelDim(int r) const { return (r < 0 || r > Rmax) ? 0 : lev[r].totalDim(); }
    /* Matrix of the right action of sigma (images, 0-based, size r) per degree. */
    DegMap actionMap(int r, const std::vector<int>& sigma) const;
    void validateActions() const;
};

SymSeq emptySeq(const Ring& R, int Rmax);
SymSeq unitSeq(const Ring& R, int Rmax);  // ring in level 1, degree 0
SymSeq truncateSeq(const SymSeq& A, int k);   // zero out levels above k; k >= 1
SymSeq levelOnlySeq(const SymSeq& A, int k);  // keep only level k
SymSeq aboveSeq(const SymSeq& A, int k);      // zero out levels <= k

/* Decompose sigma into adjacent transpositions, as 0-based generator indices
 * in application order. */
std::vector<int> adjacentWord(const std::vector<int>& sigma);

/* The permutation of [s_1 + ... + s_t] that carries block j, kept in one
 * piece, to position tau(j) in the rearranged block order. */
std::vector<int> blockPermutation(const std::vector<int>& tau, const std::vector<int>& sizes);

void validateSeqActions(const Ring& R, const std::vector<ChainComplex>& lev,
                        const std::vector<std::vector<DegMap>>& act);

/* (F_1 (*) ... (*) F_t)[r]: basis (f, x_1, ..., x_t) over the maps
 * f : [r] -> [t] with all fibers nonempty, x_j in F_j[#f^{-1}(j)]. The right
 * Sigma_r action permutes positions through f with fiber-induced internal
 * actions and no signs; when all factors coincide there is additionally a left
 * Sigma_t action permuting the x_j with Koszul signs. All factors must be
 * reduced (empty level 0). Complexes are truncated above degree degHi, so
 * homology read off the result is reliable only below degHi. */
struct PowerSeq {
    Ring ring;
    int t = 0, Rmax = 0;
    struct FBlock {
        std::vector<int> f;    // position -> factor, 0-based
        std::vector<int> fib;  // fiber sizes
        TensorComplex tc;
    };
    std::vector<std::vector<FBlock>> blocks;               // per level
    std::vector<std::map<std::vector<int>, int>> fIndex;   // per level: f -> block index
    std::vector<std::map<int, std::vector<long>>> offsets; // per level: degree -> block offsets
    std::vector<ChainComplex> lev;
    std::vector<std::vector<DegMap>> rightGens;
    std::vector<std::vector<DegMap>> leftGens;  // empty unless requested

    long posOf(int r, int blockIdx, int degree, long posInBlock) const {
        return offsets[r].at(degree)[blockIdx] + posInBlock;
    }
};
PowerSeq tensorOfSeqs(const std::vector<const SymSeq*>& fac, int Rmax, int degHi, bool wantLeft);
PowerSeq tensorPower(const SymSeq& B, int t, int Rmax, int degHi);
PowerSeq pairTensor(const SymSeq& A, const SymSeq& B, int Rmax, int degHi);

/* M (x)_{Sigma_t} N: cokernel of (m.g (x) n) - (m (x) g.n) over the adjacent
 * transposition generators. Over Z the relation span must have unit pivots. */
struct Coinv {
    TensorComplex amb;  // M (x) N with index data
    ChainComplex C;
    DegMap proj, sect;
    bool monomial = false;
};
Coinv coinvariants(const ChainComplex& M, const std::vector<DegMap>& rightGens,
                   const ChainComplex& N, const std::vector<DegMap>& leftGens, int degHi);

/* (A o B)[r] = sum over t of A[t] (x)_{Sigma_t} (B tensor power t)[r]. */
struct CirclePart {
    int t;
    Coinv cv;
    std::vector<DegMap> gens;  // right Sigma_r generators on the quotient
};
struct CircleSeq {
    SymSeq seq;
    std::vector<std::vector<CirclePart>> parts;  // per level, ascending t
};
CircleSeq circleSeq(const SymSeq& A, const SymSeq& B, int Rmax, int degHi);

}  // namespace ot
