#include "ddx/ml/vocabulary.hpp"

#include <algorithm>
#include <set>

namespace ddx {

std::vector<std::string> tokenize_name(const std::string& name) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : name) {
        if (c == ' ') {
            if (!cur.empty()) tokens.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

Vocabulary build_vocabulary(const KnowledgeBase& kb) {
    std::set<std::string> universe;
    for (const auto& f : kb.findings) {
        for (auto& t : tokenize_name(f.name)) universe.insert(std::move(t));
    }
    if (universe.empty()) fail("empty_vocabulary", "knowledge base yields no tokens");
    Vocabulary vocab;
    vocab.tokens.push_back(""); // pad
    for (const auto& t : universe) {
        vocab.id_of[t] = static_cast<int>(vocab.tokens.size());
        vocab.tokens.push_back(t);
    }
    return vocab;
}

LabelMap build_label_map(const KnowledgeBase& kb) {
    LabelMap map;
    for (const auto& d : kb.diseases) map.class_to_disease.push_back(d.id);
    std::sort(map.class_to_disease.begin(), map.class_to_disease.end());
    for (std::size_t k = 0; k < map.class_to_disease.size(); ++k)
        map.class_of[map.class_to_disease[k]] = static_cast<int>(k);
    return map;
}

std::vector<int> encode_tokens(const Vocabulary& vocab, const Case& c, const KbIndex& index,
                               int seq_len) {
    if (seq_len < 1) fail("config", "sequence length must be >= 1");
    std::set<std::string> tokens;
    for (int f : c.findings_present) {
        for (auto& t : tokenize_name(index.finding(f).name)) tokens.insert(std::move(t));
    }
    std::vector<int> ids;
    ids.reserve(static_cast<std::size_t>(seq_len));
    for (const auto& t : tokens) {
        if (ids.size() == static_cast<std::size_t>(seq_len)) break;
        auto it = vocab.id_of.find(t);
        if (it == vocab.id_of.end()) fail("unknown_token", "token '" + t + "' is not in the vocabulary");
        ids.push_back(it->second);
    }
    ids.resize(static_cast<std::size_t>(seq_len), 0);
    return ids;
}

EncodedCase encode_case(const Vocabulary& vocab, const LabelMap& labels, const Case& c,
                        const KbIndex& index, int seq_len) {
    EncodedCase out;
    out.token_ids = encode_tokens(vocab, c, index, seq_len);
    auto lit = labels.class_of.find(c.disease_id);
    if (lit == labels.class_of.end())
        fail("unknown_disease", "case labels disease " + std::to_string(c.disease_id) +
                                    " outside the label map");
    out.label = lit->second;
    return out;
}

EncodedDataset encode_dataset(const Vocabulary& vocab, const LabelMap& labels, const Dataset& ds,
                              const KnowledgeBase& kb, int seq_len) {
    KbIndex index(kb);
    EncodedDataset out;
    out.seq_len = seq_len;
    out.vocab_size = vocab.size();
    out.n_classes = labels.n_classes();
    out.items.reserve(ds.cases.size());
    for (const Case& c : ds.cases) out.items.push_back(encode_case(vocab, labels, c, index, seq_len));
    return out;
}

std::vector<int> active_features(const std::vector<int>& token_ids) {
    std::vector<int> feats;
    for (int id : token_ids) {
        if (id > 0) feats.push_back(id - 1);
    }
    return feats;
}

} // namespace ddx
