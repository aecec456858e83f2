#ifndef DISPATCH_CONSISTENCY_HPP
#define DISPATCH_CONSISTENCY_HPP

#include <array>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dispatch {

struct Keyword {
    std::string segment; // verbatim substring of the source text
    double score = 0.0;  // lower = more important
};

using KeywordList = std::vector<Keyword>;

// Statistical keyword extraction over 1..3-gram candidates with no stopword at
// either edge. Terms are scored by casing, first-occurrence position,
// normalized frequency, left/right context diversity and sentence dispersion;
// candidates by the combined term score. Returns the top-k, best first.
KeywordList extract_keywords(std::string_view text, int k = 5);

// Soft Jaccard over keyword segments: two segments match when their lowercase
// token sets overlap with Jaccard >= 0.5; segments pair up via maximum
// bipartite matching so the score is symmetric. Both lists empty -> 1.0.
double keyword_overlap(const KeywordList& a, const KeywordList& b);

// Pluggable sentence embedder. The default is a deterministic L2-normalized
// hashed character-trigram count vector.
constexpr int kEmbeddingDim = 256;
using Embedding = std::array<double, kEmbeddingDim>;
using Embedder = std::function<Embedding(std::string_view)>;

Embedding trigram_embedding(std::string_view text);

// Cosine similarity clamped to [0,1]; an all-zero embedding (empty text)
// scores 0.5 against anything, the neutral point.
double semantic_similarity(std::string_view a, std::string_view b);
double semantic_similarity(std::string_view a, std::string_view b, const Embedder& embedder);

struct ConsistencyScore {
    double value = 0.0;
    double keyword_component = 0.0;
    double semantic_component = 0.0;
};

constexpr double kKeywordWeight = 0.2; // p in the convex combination

ConsistencyScore pairwise_consistency(std::string_view a, std::string_view b);
ConsistencyScore pairwise_consistency(std::string_view a, std::string_view b,
                                      double keyword_weight);

struct BaselineScores {
    double bleu_bigram = 0.0;
    double dld_similarity = 0.0;
    double rouge1_f = 0.0;
};

// bleu_bigram: geometric mean of clipped 1/2-gram precisions of a against b,
// with brevity penalty. dld_similarity: 1 - DLD(a,b)/max(|a|,|b|) over bytes.
// rouge1_f: unigram F-measure.
BaselineScores baseline_scores(std::string_view a, std::string_view b);

struct CorpusPair {
    int group = 0; // 1..3
    std::string text_a;
    std::string text_b;
};

struct MetricTable {
    // group -> metric name -> mean score
    std::map<int, std::map<std::string, double>> means;
    std::map<int, int> pair_counts;
};

// Means of all five metrics (consistency, keyword_overlap, semantic_similarity,
// bleu_bigram, dld_similarity, rouge1_f) per group. Throws on an empty group.
MetricTable run_metric_validation(const std::vector<CorpusPair>& corpus);

std::vector<CorpusPair> load_metric_corpus_tsv(const std::string& path);

} // namespace dispatch

#endif
