#include <bits/stdc++.h>
using namespace std;
int main() {
  long long n;
  cin >> n;
  int lucky = 0;
  while (n > 0) {
    int d = n % 10;
    if (d == 4 || d == 7) lucky++;
    n /= 10;
  }
  if (lucky == 4 || lucky == 7) {
    cout << "YES" << endl;
  } else {
    cout << "NO" << endl;
  }
  return 0;
}
