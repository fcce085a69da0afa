#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ddx/dataset.hpp"
#include "ddx/knowledge_base.hpp"

namespace ddx {

// Universe of unigram tokens over all finding names. Id 0 is the pad id;
// real tokens get dense ids 1..size() in lexicographic order.
struct Vocabulary {
    std::vector<std::string> tokens; // tokens[0] == "" (pad)
    std::unordered_map<std::string, int> id_of;

    int size() const { return static_cast<int>(tokens.size()) - 1; } // |Z|
};

std::vector<std::string> tokenize_name(const std::string& name);

Vocabulary build_vocabulary(const KnowledgeBase& kb); // error on empty universe

// Dense class indexing: class k corresponds to the k-th disease id ascending.
struct LabelMap {
    std::vector<int> class_to_disease;
    std::unordered_map<int, int> class_of;

    int n_classes() const { return static_cast<int>(class_to_disease.size()); }
};

LabelMap build_label_map(const KnowledgeBase& kb);

struct EncodedCase {
    std::vector<int> token_ids; // fixed length, sorted tokens then pad
    int label = 0;              // class index
};

struct EncodedDataset {
    int seq_len = 0;
    int vocab_size = 0;
    int n_classes = 0;
    std::vector<EncodedCase> items;
};

// Deduplicated union of the case's finding-name tokens, lexicographic order,
// padded or truncated to seq_len. Pure in all inputs.
std::vector<int> encode_tokens(const Vocabulary& vocab, const Case& c, const KbIndex& index,
                               int seq_len = 200);

EncodedCase encode_case(const Vocabulary& vocab, const LabelMap& labels, const Case& c,
                        const KbIndex& index, int seq_len = 200);

EncodedDataset encode_dataset(const Vocabulary& vocab, const LabelMap& labels, const Dataset& ds,
                              const KnowledgeBase& kb, int seq_len = 200);

// Active LR feature indices (token id - 1) of an encoded sequence.
std::vector<int> active_features(const std::vector<int>& token_ids);

} // namespace ddx
