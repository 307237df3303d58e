#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace testsupport {

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() / ("topictrace_test_" + name);
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << content;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testsupport

#include "topictrace/corpus.hpp"
#include "topictrace/synthgen.hpp"

namespace testsupport {

struct Encoded {
    topictrace::Vocabulary vocab;
    std::vector<topictrace::EncodedDocument> docs;
};

// Synthetic documents through the regular text path, keeping every term.
inline Encoded encode_all(const std::vector<topictrace::RawDocument>& raw) {
    std::vector<std::vector<std::string>> tokens;
    for (const auto& d : raw) tokens.push_back(topictrace::normalize(d.text, topictrace::default_stopwords()));
    Encoded e;
    e.vocab = topictrace::build_vocabulary(tokens, 1.0);
    topictrace::IngestReport report;
    e.docs = topictrace::encode(raw, tokens, e.vocab, report);
    return e;
}

}  // namespace testsupport
