#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mock_servers.hpp"
#include "ragdx/harness.hpp"
#include "ragdx/relevance.hpp"

namespace ragdx::testing {

std::filesystem::path fixture_path(const std::string& name);
std::filesystem::path share_path(const std::string& name);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

void write_file(const std::filesystem::path& p, const std::string& content);
std::string read_file(const std::filesystem::path& p);

/// answer text -> adherence score served for the case-study fixture.
std::map<std::string, double> case_study_adherence();

/// Judge handler for the case-study fixture: adherence from the table
/// above, fixed answer relevancy, context relevancy by lexical overlap.
MockJudgeServer::Handler case_study_judge();

/// Random hit matrix with ragged rows allowed.
HitMatrix random_hit_matrix(std::mt19937_64& rng, std::size_t max_queries, std::size_t max_k);

/// Brute-force references written straight from the metric definitions.
namespace oracle {

double recall_at_k(const HitMatrix& m, std::size_t k);
double mrr(const HitMatrix& m);
double map(const HitMatrix& m);
double ndcg(const HitMatrix& m);
std::vector<double> context_hit_rate(const HitMatrix& m);
double no_hit_rate(const HitMatrix& m);
std::vector<double> exclusive_hit_rate(const HitMatrix& m);
double redundancy(const HitMatrix& m, std::size_t i, std::size_t j);

std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct FusedRef {
    std::string chunk_id;
    double score = 0.0;
};
/// Every chunk in either list, scored and ordered by score, then dense rank
/// (absent last), then chunk id.
std::vector<FusedRef> rrf(const std::vector<Ranked>& sparse, const std::vector<Ranked>& dense, double alpha,
                          int rrf_k);

}  // namespace oracle

}  // namespace ragdx::testing
