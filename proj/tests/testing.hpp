#ifndef NEURODIFFUSE_TESTS_TESTING_HPP
#define NEURODIFFUSE_TESTS_TESTING_HPP

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

// Minimal check harness shared by the test executables: named cases, CHECK
// macros that keep going after a failure, nonzero exit when anything failed.
namespace testing {

inline int& failures() {
    static int n = 0;
    return n;
}

inline const char*& current_case() {
    static const char* name = "";
    return name;
}

inline void fail(const char* expr, const char* file, int line, const std::string& detail) {
    ++failures();
    std::fprintf(stderr, "FAIL [%s] %s:%d: %s%s\n", current_case(), file, line, expr,
                 detail.empty() ? "" : ("  " + detail).c_str());
}

inline void run_case(const char* name, const std::function<void()>& body) {
    current_case() = name;
    const int before = failures();
    try {
        body();
    } catch (const std::exception& e) {
        ++failures();
        std::fprintf(stderr, "FAIL [%s] unexpected exception: %s\n", name, e.what());
    }
    std::printf("%-58s %s\n", name, failures() == before ? "ok" : "FAILED");
    current_case() = "";
}

inline int finish() {
    if (failures() > 0) {
        std::printf("%d check(s) failed\n", failures());
        return 1;
    }
    std::printf("all tests passed\n");
    return 0;
}

inline bool approx(double a, double b, double tol) {
    return std::abs(a - b) <= tol;
}

inline bool approx_rel(double a, double b, double rel) {
    return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

} // namespace testing

#define TEST_CASE(name) testing::run_case(name, [&]()
#define TEST_CASE_END )

#define CHECK(cond)                                                                   \
    do {                                                                              \
        if (!(cond))                                                                  \
            testing::fail(#cond, __FILE__, __LINE__, "");                             \
    } while (0)

#define CHECK_NEAR(a, b, tol)                                                         \
    do {                                                                              \
        const double va = (a), vb = (b), vt = (tol);                                  \
        if (!testing::approx(va, vb, vt))                                             \
            testing::fail(#a " ~ " #b, __FILE__, __LINE__,                            \
                          "got " + std::to_string(va) + " vs " + std::to_string(vb)); \
    } while (0)

#define CHECK_REL(a, b, rel)                                                          \
    do {                                                                              \
        const double va = (a), vb = (b), vr = (rel);                                  \
        if (!testing::approx_rel(va, vb, vr))                                         \
            testing::fail(#a " ~rel " #b, __FILE__, __LINE__,                         \
                          "got " + std::to_string(va) + " vs " + std::to_string(vb)); \
    } while (0)

#define CHECK_THROWS(etype, expr)                                                     \
    do {                                                                              \
        bool caught = false;                                                          \
        try {                                                                         \
            (void)(expr);                                                             \
        } catch (const etype&) {                                                      \
            caught = true;                                                            \
        } catch (...) {                                                               \
        }                                                                             \
        if (!caught)                                                                  \
            testing::fail("expected " #etype " from " #expr, __FILE__, __LINE__, ""); \
    } while (0)

#endif
