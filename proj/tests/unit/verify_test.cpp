#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "uimart/verify.hpp"

using namespace uimart;

namespace {

VerifyOptions reduced(const std::string& name) {
    VerifyOptions opt;
    opt.config = default_verify_config(true);
    opt.config.n_paths = 2000;
    opt.config.output_dir = (std::filesystem::path(UIMART_TEST_TMP) / name).string();
    opt.y_draws = 100'000;
    opt.check_reproducibility = false;
    return opt;
}

const CriterionResult& criterion(const VerifyReport& r, int id) {
    auto const it = std::find_if(r.criteria.begin(), r.criteria.end(),
                                 [id](const CriterionResult& c) { return c.id == id; });
    EXPECT_NE(it, r.criteria.end());
    return *it;
}

}  // namespace

TEST(Verify, ThresholdLawPassesOnCleanRun) {
    std::ostringstream log;
    VerifyReport const r = run_verification(reduced("verify-clean"), log);
    ASSERT_EQ(r.criteria.size(), 7u) << "criterion 8 is skipped without the rerun";
    EXPECT_TRUE(criterion(r, 1).passed());
    EXPECT_TRUE(criterion(r, 2).passed());
    EXPECT_TRUE(criterion(r, 7).passed());
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(reduced("verify-clean").config.output_dir) / "criteria.csv"));
}

TEST(Verify, FaultyC0IsCaughtByThresholdCriterion) {
    VerifyOptions opt = reduced("verify-fault");
    opt.faulty_c0 = std::numbers::e;
    std::ostringstream log;
    VerifyReport const r = run_verification(opt, log);
    EXPECT_FALSE(r.passed());
    EXPECT_FALSE(criterion(r, 2).passed());
    auto const failing = r.failing();
    EXPECT_NE(std::find(failing.begin(), failing.end(), 2), failing.end());

    std::ostringstream table;
    print_report(r, table);
    EXPECT_NE(table.str().find("FAIL"), std::string::npos);
}
