#include <bits/stdc++.h>
using namespace std;
int calc(int x, int y) {
  int r = 0;
  while (x > 0 && y > 0) {
    if (x > y)
      x -= y;
    else
      y -= x;
    r++;
  }
  return r;
}
int main() {
  int a, b;
  cin >> a >> b;
  cout << calc(a, b) << endl;
  return 0;
}
