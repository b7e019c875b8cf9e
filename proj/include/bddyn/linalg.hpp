#pragma once

#include <array>

namespace bddyn {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

Mat3 identity3();
Mat3 matmul(const Mat3& a, const Mat3& b);
Vec3 matvec(const Mat3& a, const Vec3& v);
Mat3 transpose(const Mat3& a);
double det3(const Mat3& a);

// Adjugate over determinant. Throws bddyn::DomainError if det is zero or non-finite.
Mat3 inverse3(const Mat3& a);

// Gaussian elimination with partial pivoting, independent of inverse3.
Vec3 solve3(Mat3 a, Vec3 b);

double max_abs(const Mat3& a);
double max_abs(const Vec3& v);
double norm2(const Vec3& v);

}  // namespace bddyn
