#include <bits/stdc++.h>
using namespace std;
long long power(long long base, int e)
{
  long long result = 1;
  while (e > 0) {
    if (e % 2 == 1) result *= base;
    base *= base;
    e /= 2;
  }
  return result;
}
int main()
{
  long long b;
  int e;
  cin >> b >> e;
  cout << power(b, e) << endl;
  return 0;
}
