#include <bits/stdc++.h>
using namespace std;
int main() {
  int n;
  cin >> n;
  vector<int> h(n);
  for (int i = 0; i < n; i++) {
    cin >> h[i];
  }
  int pos = 0;
  for (int i = 1; i < n; i++) {
    if (h[i] > h[pos]) pos = i;
  }
  {
    int tmp = h[pos];
    h[pos] = h[0];
    h[0] = tmp;
  }
  cout << pos << " " << h[0] << endl;
  return 0;
}
