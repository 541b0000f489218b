#!/usr/bin/env python3
"""
星复杂度工具 - 运行脚本
"""

import sys
import asyncio
from main import main

def run():
    """运行主程序，进度提示写到 stderr，标准输出留给 CSV"""
    try:
        code = asyncio.run(main())
    except KeyboardInterrupt:
        print("\n⚠️  程序被用户中断", file=sys.stderr)
        sys.exit(130)
    if code == 0:
        print("✅ 完成！", file=sys.stderr)
    else:
        print(f"❌ 程序退出，退出码 {code}", file=sys.stderr)
    sys.exit(code)

if __name__ == "__main__":
    run()
