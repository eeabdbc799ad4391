#ifndef REFINERKIT_TESTS_FIXTURES_HPP
#define REFINERKIT_TESTS_FIXTURES_HPP

#include <string>

namespace testgen {

// The multiple-choice grading case: ground truth C, but the model opens
// with "(B)" — substring matching over-credits it, first-match letter
// capture does not.
inline const std::string& choice_case_prediction() {
    static const std::string text =
        "Based on the given information, the best answer choice is (B) 41\xc2\xb0"
        "F.\n\nThe given information states that the morning temperature is "
        "41\xc2\xb0"
        "F, which suggests that the day will be sunny and mild. As the "
        "temperature drops gradually throughout the day, it is unlikely that the "
        "temperature at 2:00 p.m. will be above 78\xc2\xb0"
        "F or 98\xc2\xb0"
        "F, as these temperatures are much higher than the morning temperature. "
        "Therefore, the most likely temperature for 2:00 p.m. is 41\xc2\xb0"
        "F, which is the same as the morning temperature.\n\nAnswer choice (A) "
        "32\xc2\xb0"
        "F is too low, as it is below the morning temperature and unlikely to be "
        "the temperature at 2:00 p.m. in a sunny and mild day. Answer choice (C) "
        "78\xc2\xb0"
        "F is also unlikely, as it is higher than the morning temperature and may "
        "not be reached in the afternoon. Answer choice (D) 98\xc2\xb0"
        "F is the highest temperature mentioned in the passage and is therefore "
        "unlikely to be the temperature at 2:00 p.m.";
    return text;
}

}  // namespace testgen

#endif
