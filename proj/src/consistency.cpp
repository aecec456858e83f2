#include "dispatch/consistency.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "dispatch/text.hpp"

namespace dispatch {

namespace {

struct TermStats {
    int tf = 0;
    int tf_capitalized = 0; // capitalized occurrences away from a sentence start
    int tf_acronym = 0;
    int first_sentence = 0;
    std::set<std::string> left_neighbors;
    std::set<std::string> right_neighbors;
    int left_occurrences = 0;
    int right_occurrences = 0;
    std::set<int> sentences;
    double score = 0.0;
};

struct SentenceSpan {
    std::size_t token_begin = 0;
    std::size_t token_end = 0; // exclusive
};

bool is_capitalized(const std::string& word) {
    return !word.empty() && std::isupper(static_cast<unsigned char>(word[0]));
}

bool is_acronym(const std::string& word) {
    if (word.size() < 2) return false;
    for (unsigned char c : word)
        if (!std::isupper(c) && !std::isdigit(c)) return false;
    return std::isupper(static_cast<unsigned char>(word[0]));
}

// Sentence boundaries at ., !, ? and ; — token indices per sentence.
std::vector<SentenceSpan> split_sentences(std::string_view text, const std::vector<Token>& tokens) {
    std::vector<SentenceSpan> spans;
    SentenceSpan current;
    std::size_t next_token = 0;
    for (std::size_t pos = 0; pos <= text.size(); ++pos) {
        bool boundary = pos == text.size() || text[pos] == '.' || text[pos] == '!' ||
                        text[pos] == '?' || text[pos] == ';';
        if (!boundary) continue;
        while (next_token < tokens.size() && tokens[next_token].end <= pos) ++next_token;
        if (next_token > current.token_begin) {
            current.token_end = next_token;
            spans.push_back(current);
        }
        current.token_begin = next_token;
    }
    if (spans.empty() && !tokens.empty()) spans.push_back({0, tokens.size()});
    return spans;
}

} // namespace

KeywordList extract_keywords(std::string_view text, int k) {
    const auto tokens = tokenize(text);
    if (tokens.empty() || k <= 0) return {};
    const auto sentences = split_sentences(text, tokens);

    std::vector<int> sentence_of(tokens.size(), 0);
    for (std::size_t s = 0; s < sentences.size(); ++s)
        for (std::size_t i = sentences[s].token_begin; i < sentences[s].token_end; ++i)
            sentence_of[i] = static_cast<int>(s);

    std::unordered_map<std::string, TermStats> terms;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto& st = terms[tokens[i].lower];
        if (st.tf == 0) st.first_sentence = sentence_of[i];
        ++st.tf;
        const bool sentence_start =
            i == sentences[sentence_of[i]].token_begin;
        if (is_acronym(tokens[i].text))
            ++st.tf_acronym;
        else if (is_capitalized(tokens[i].text) && !sentence_start)
            ++st.tf_capitalized;
        if (i > 0 && sentence_of[i - 1] == sentence_of[i]) {
            st.left_neighbors.insert(tokens[i - 1].lower);
            ++st.left_occurrences;
        }
        if (i + 1 < tokens.size() && sentence_of[i + 1] == sentence_of[i]) {
            st.right_neighbors.insert(tokens[i + 1].lower);
            ++st.right_occurrences;
        }
        st.sentences.insert(sentence_of[i]);
    }

    double mean_tf = 0.0, max_tf = 0.0;
    for (const auto& [w, st] : terms) {
        mean_tf += st.tf;
        max_tf = std::max(max_tf, static_cast<double>(st.tf));
    }
    mean_tf /= static_cast<double>(terms.size());
    double var_tf = 0.0;
    for (const auto& [w, st] : terms) var_tf += (st.tf - mean_tf) * (st.tf - mean_tf);
    const double std_tf = std::sqrt(var_tf / static_cast<double>(terms.size()));
    const double n_sentences = static_cast<double>(sentences.size());

    for (auto& [w, st] : terms) {
        const double w_case =
            std::max(st.tf_capitalized, st.tf_acronym) / (1.0 + std::log(st.tf));
        const double w_pos = std::log(std::log(3.0 + st.first_sentence));
        const double w_freq = st.tf / (mean_tf + std_tf + 1e-9);
        const double dl = st.left_occurrences
                              ? static_cast<double>(st.left_neighbors.size()) / st.left_occurrences
                              : 0.0;
        const double dr = st.right_occurrences
                              ? static_cast<double>(st.right_neighbors.size()) / st.right_occurrences
                              : 0.0;
        const double w_rel = 1.0 + (dl + dr) * (st.tf / max_tf);
        const double w_spread = static_cast<double>(st.sentences.size()) / n_sentences;
        st.score = (w_rel * w_pos) / (w_case + w_freq / w_rel + w_spread / w_rel);
    }

    // Candidate segments: 1..3 consecutive tokens within a sentence, no
    // stopword at either edge.
    struct Candidate {
        std::string key;
        std::string segment;
        double score = 0.0;
        int tf = 0;
    };
    std::unordered_map<std::string, Candidate> candidates;
    for (const auto& span : sentences) {
        for (std::size_t i = span.token_begin; i < span.token_end; ++i) {
            if (is_stopword(tokens[i].lower)) continue;
            for (std::size_t len = 1; len <= 3 && i + len <= span.token_end; ++len) {
                const std::size_t j = i + len - 1;
                if (is_stopword(tokens[j].lower)) continue;
                std::string key;
                double product = 1.0;
                for (std::size_t t = i; t <= j; ++t) {
                    if (!key.empty()) key += ' ';
                    key += tokens[t].lower;
                    product *= terms.at(tokens[t].lower).score;
                }
                auto it = candidates.find(key);
                if (it == candidates.end()) {
                    Candidate c;
                    c.key = key;
                    c.segment = std::string(text.substr(tokens[i].begin, tokens[j].end - tokens[i].begin));
                    c.score = product; // divided by the tf term below, once counts are known
                    c.tf = 1;
                    candidates.emplace(std::move(key), std::move(c));
                } else {
                    ++it->second.tf;
                }
            }
        }
    }
    std::vector<Candidate> ranked;
    ranked.reserve(candidates.size());
    for (auto& [key, c] : candidates) {
        double sum = 0.0;
        for (const auto& w : split_phrase_lower(key)) sum += terms.at(w).score;
        c.score = c.score / (c.tf * (1.0 + sum));
        ranked.push_back(c);
    }
    std::sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.key < b.key;
    });

    KeywordList out;
    for (const auto& c : ranked) {
        if (static_cast<int>(out.size()) >= k) break;
        out.push_back({c.segment, c.score});
    }
    return out;
}

namespace {

double token_set_jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t inter = 0;
    for (const auto& w : a) inter += b.count(w);
    const std::size_t uni = a.size() + b.size() - inter;
    return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

// Kuhn's augmenting-path matching on the (tiny) segment compatibility graph.
bool try_augment(int u, const std::vector<std::vector<int>>& adj, std::vector<int>& match_b,
                 std::vector<bool>& used) {
    for (int v : adj[u]) {
        if (used[v]) continue;
        used[v] = true;
        if (match_b[v] < 0 || try_augment(match_b[v], adj, match_b, used)) {
            match_b[v] = u;
            return true;
        }
    }
    return false;
}

} // namespace

double keyword_overlap(const KeywordList& a, const KeywordList& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;

    std::vector<std::set<std::string>> sa, sb;
    for (const auto& kw : a) {
        auto toks = split_phrase_lower(kw.segment);
        sa.emplace_back(toks.begin(), toks.end());
    }
    for (const auto& kw : b) {
        auto toks = split_phrase_lower(kw.segment);
        sb.emplace_back(toks.begin(), toks.end());
    }

    std::vector<std::vector<int>> adj(sa.size());
    for (std::size_t i = 0; i < sa.size(); ++i)
        for (std::size_t j = 0; j < sb.size(); ++j)
            if (token_set_jaccard(sa[i], sb[j]) >= 0.5) adj[i].push_back(static_cast<int>(j));

    std::vector<int> match_b(sb.size(), -1);
    int matched = 0;
    for (std::size_t u = 0; u < sa.size(); ++u) {
        std::vector<bool> used(sb.size(), false);
        if (try_augment(static_cast<int>(u), adj, match_b, used)) ++matched;
    }
    const double uni = static_cast<double>(a.size() + b.size() - matched);
    return matched / uni;
}

Embedding trigram_embedding(std::string_view text) {
    Embedding v{};
    // normalize: lowercase, collapse whitespace runs, trim
    std::string norm;
    norm.reserve(text.size());
    for (char c : text) {
        const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (std::isspace(static_cast<unsigned char>(lc))) {
            if (!norm.empty() && norm.back() != ' ') norm += ' ';
        } else {
            norm += lc;
        }
    }
    while (!norm.empty() && norm.back() == ' ') norm.pop_back();
    if (norm.empty()) return v;

    if (norm.size() < 3) {
        v[fnv1a64(norm) % kEmbeddingDim] += 1.0;
    } else {
        for (std::size_t i = 0; i + 3 <= norm.size(); ++i)
            v[fnv1a64(std::string_view(norm).substr(i, 3)) % kEmbeddingDim] += 1.0;
    }
    double norm2 = 0.0;
    for (double x : v) norm2 += x * x;
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& x : v) x *= inv;
    return v;
}

double semantic_similarity(std::string_view a, std::string_view b, const Embedder& embedder) {
    const Embedding ea = embedder(a);
    const Embedding eb = embedder(b);
    double na = 0.0, nb = 0.0, dot = 0.0;
    for (int i = 0; i < kEmbeddingDim; ++i) {
        na += ea[i] * ea[i];
        nb += eb[i] * eb[i];
        dot += ea[i] * eb[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.5; // neutral point for an empty embedding
    return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

double semantic_similarity(std::string_view a, std::string_view b) {
    return semantic_similarity(a, b, trigram_embedding);
}

ConsistencyScore pairwise_consistency(std::string_view a, std::string_view b,
                                      double keyword_weight) {
    ConsistencyScore s;
    s.keyword_component = keyword_overlap(extract_keywords(a), extract_keywords(b));
    s.semantic_component = semantic_similarity(a, b);
    s.value = keyword_weight * s.keyword_component + (1.0 - keyword_weight) * s.semantic_component;
    return s;
}

ConsistencyScore pairwise_consistency(std::string_view a, std::string_view b) {
    return pairwise_consistency(a, b, kKeywordWeight);
}

namespace {

std::vector<std::string> lower_tokens(std::string_view s) {
    std::vector<std::string> out;
    for (auto& t : tokenize(s)) out.push_back(std::move(t.lower));
    return out;
}

double clipped_precision(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                         std::size_t n) {
    if (cand.size() < n) return -1.0; // order unavailable
    std::map<std::vector<std::string>, int> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i)
        ++ref_counts[std::vector<std::string>(ref.begin() + i, ref.begin() + i + n)];
    int matched = 0;
    int total = 0;
    std::map<std::vector<std::string>, int> used;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) {
        std::vector<std::string> gram(cand.begin() + i, cand.begin() + i + n);
        ++total;
        auto it = ref_counts.find(gram);
        if (it != ref_counts.end() && used[gram] < it->second) {
            ++used[gram];
            ++matched;
        }
    }
    return total ? static_cast<double>(matched) / total : -1.0;
}

int damerau_levenshtein(std::string_view a, std::string_view b) {
    const int n = static_cast<int>(a.size());
    const int m = static_cast<int>(b.size());
    std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1, 0));
    for (int i = 0; i <= n; ++i) d[i][0] = i;
    for (int j = 0; j <= m; ++j) d[0][j] = j;
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= m; ++j) {
            const int cost = a[i - 1] == b[j - 1] ? 0 : 1;
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
            if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1])
                d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
        }
    }
    return d[n][m];
}

} // namespace

BaselineScores baseline_scores(std::string_view a, std::string_view b) {
    BaselineScores out;

    const auto ca = lower_tokens(a);
    const auto cb = lower_tokens(b);

    // BLEU-bigram, a as candidate against b as reference
    if (ca.empty()) {
        out.bleu_bigram = cb.empty() ? 1.0 : 0.0;
    } else {
        const double p1 = clipped_precision(ca, cb, 1);
        const double p2 = clipped_precision(ca, cb, 2);
        double geo;
        if (p2 < 0.0)
            geo = std::max(p1, 0.0);
        else
            geo = std::sqrt(std::max(p1, 0.0) * std::max(p2, 0.0));
        const double c = static_cast<double>(ca.size());
        const double r = static_cast<double>(cb.size());
        const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
        out.bleu_bigram = std::clamp(geo * bp, 0.0, 1.0);
    }

    // character-level Damerau-Levenshtein similarity
    const std::size_t longest = std::max(a.size(), b.size());
    out.dld_similarity =
        longest == 0 ? 1.0
                     : 1.0 - static_cast<double>(damerau_levenshtein(a, b)) / static_cast<double>(longest);
    out.dld_similarity = std::clamp(out.dld_similarity, 0.0, 1.0);

    // ROUGE-1 F
    if (ca.empty() && cb.empty()) {
        out.rouge1_f = 1.0;
    } else if (ca.empty() || cb.empty()) {
        out.rouge1_f = 0.0;
    } else {
        std::map<std::string, int> counts_b;
        for (const auto& w : cb) ++counts_b[w];
        std::map<std::string, int> used;
        int overlap = 0;
        for (const auto& w : ca) {
            auto it = counts_b.find(w);
            if (it != counts_b.end() && used[w] < it->second) {
                ++used[w];
                ++overlap;
            }
        }
        const double p = static_cast<double>(overlap) / ca.size();
        const double r = static_cast<double>(overlap) / cb.size();
        out.rouge1_f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    }
    return out;
}

MetricTable run_metric_validation(const std::vector<CorpusPair>& corpus) {
    MetricTable table;
    std::map<int, std::map<std::string, double>> sums;
    for (const auto& pair : corpus) {
        const auto c = pairwise_consistency(pair.text_a, pair.text_b);
        const auto base = baseline_scores(pair.text_a, pair.text_b);
        auto& s = sums[pair.group];
        s["consistency"] += c.value;
        s["keyword_overlap"] += c.keyword_component;
        s["semantic_similarity"] += c.semantic_component;
        s["bleu_bigram"] += base.bleu_bigram;
        s["dld_similarity"] += base.dld_similarity;
        s["rouge1_f"] += base.rouge1_f;
        ++table.pair_counts[pair.group];
    }
    for (int g = 1; g <= 3; ++g) {
        if (!table.pair_counts.count(g) || table.pair_counts.at(g) == 0)
            throw std::runtime_error("metric corpus group " + std::to_string(g) + " is empty");
    }
    for (auto& [group, s] : sums) {
        const double n = table.pair_counts.at(group);
        for (auto& [name, sum] : s) table.means[group][name] = sum / n;
    }
    return table;
}

std::vector<CorpusPair> load_metric_corpus_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open metric corpus: " + path);
    std::vector<CorpusPair> corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string group, a, b;
        std::getline(ss, group, '\t');
        std::getline(ss, a, '\t');
        std::getline(ss, b, '\t');
        if (group == "group") continue; // header
        CorpusPair p;
        p.group = std::stoi(group);
        p.text_a = a;
        p.text_b = b;
        corpus.push_back(std::move(p));
    }
    return corpus;
}

} // namespace dispatch
